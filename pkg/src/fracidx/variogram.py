"""Empirical and theoretical variograms.

The p-th order variogram at lag k/n is the mean p-th absolute power of the
lag-k increments,

    gamma_p(k/n) = (n - k)^-1 * sum_{i=1}^{n-k} |X_{(i+k)/n} - X_{i/n}|^p,

with the divisor n - k exactly (no bias-corrected variant).  The
kappa-differenced statistic

    f_p(k/n) = gamma_p(kappa*k/n)^(2/p) - gamma_p(k/n)^(2/p)

cancels any additive iid noise contribution to the variogram (which enters
as a lag-independent constant after the 2/p power when p = 2) and may be
negative in finite samples; callers that need its log decide how to react.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ValidationError
from .kernels import variogram_lags
from .models import as_values


def moment_constant(s: float) -> float:
    """Absolute moment E|Z|^s of a standard normal, 2^(s/2) Gamma((s+1)/2) / sqrt(pi)."""
    if s <= 0:
        raise ValidationError(f"moment order must be positive, got {s}")
    return math.exp(0.5 * s * math.log(2.0) + gammaln((s + 1.0) / 2.0) - 0.5 * math.log(math.pi))


def fbm_variogram(p: float, h: float, alpha: float) -> float:
    """Theoretical p-th order variogram C_p * h^(p*(alpha+1/2)) of fBm."""
    if h <= 0:
        raise ValidationError(f"lag must be positive, got {h}")
    if p <= 0:
        raise ValidationError(f"power must be positive, got {p}")
    return moment_constant(p) * h ** (p * (alpha + 0.5))


def empirical_variogram(path, p: float, k: int) -> float:
    """Mean p-th absolute power of the lag-k increments of the path."""
    x = as_values(path)
    if p <= 0:
        raise ValidationError(f"power must be positive, got {p}")
    if not 1 <= k <= x.shape[0] - 1:
        raise ValidationError(f"lag k={k} must satisfy 1 <= k <= n-1 = {x.shape[0] - 1}")
    return float(variogram_lags(x, [k], p)[0])


def empirical_variogram_lags(path, p: float, lags) -> np.ndarray:
    """Variogram values at several lags in one pass over the data."""
    x = as_values(path)
    if p <= 0:
        raise ValidationError(f"power must be positive, got {p}")
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size == 0:
        raise ValidationError("need at least one lag")
    if lags.min() < 1 or lags.max() > x.shape[0] - 1:
        raise ValidationError(f"lags must satisfy 1 <= k <= n-1 = {x.shape[0] - 1}")
    return variogram_lags(x, lags, p)


def kappa_difference(path, p: float, k: int, kappa: int) -> float:
    """Noise-cancelling statistic gamma_p(kappa*k/n)^(2/p) - gamma_p(k/n)^(2/p)."""
    x = as_values(path)
    if kappa < 2 or int(kappa) != kappa:
        raise ValidationError(f"kappa must be an integer >= 2, got {kappa}")
    if not 1 <= kappa * k <= x.shape[0] - 1:
        raise ValidationError(
            f"kappa*k = {kappa * k} must satisfy 1 <= kappa*k <= n-1 = {x.shape[0] - 1}"
        )
    g = variogram_lags(x, [k, kappa * k], p)
    return float(g[1] ** (2.0 / p) - g[0] ** (2.0 / p))


@dataclass
class VariogramCurve:
    """Empirical variogram values over an increasing set of lags."""

    p: float
    lags: np.ndarray
    values: np.ndarray
    n: int

    def __post_init__(self):
        self.lags = np.asarray(self.lags, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.lags.shape != self.values.shape:
            raise ValidationError("lags and values must align")
        if np.any(np.diff(self.lags) <= 0):
            raise ValidationError("lags must be strictly increasing")
        if self.lags.size and (self.lags[0] < 1 or self.lags[-1] >= self.n):
            raise ValidationError("lags must satisfy 1 <= k <= n-1")
        if np.any(self.values < 0):
            raise ValidationError("variogram values cannot be negative")


def variogram_curve(path, p: float, max_lag: int) -> VariogramCurve:
    """VariogramCurve at lags 1..max_lag."""
    x = as_values(path)
    lags = np.arange(1, max_lag + 1, dtype=np.int64)
    return VariogramCurve(p=p, lags=lags, values=empirical_variogram_lags(x, p, lags), n=x.shape[0])
