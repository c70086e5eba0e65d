"""Log-log regression estimators of the fractal index.

The plain estimator regresses log variogram values at lags 1..m on centered
log lags and maps the slope a to alpha = a/p - 1/2.  The noise-robust
variant runs the same regression on the kappa-differenced statistic and
maps its slope as alpha = a/2 - 1/2 -- the divisor is 2 for every p, since
the 2/p power inside the differenced statistic already rescales the slope.

Both estimators are exact on injected power-law variograms, which is the
unit-level oracle used by the test-suite, and are affine-invariant in the
observations because the centered design vector annihilates constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariogramError, NonpositiveGapError, ValidationError
from .models import as_values
from .variogram import empirical_variogram_lags, moment_constant

CLT_ALPHA_MAX = 0.25


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning bundle: power p, bandwidth m, and (robust only) gap factor kappa.

    Defaults target presumed-rough data (m = 5); use ``smooth()`` when the
    underlying process is believed smooth, where m = 2 has lower MSE.
    """

    p: float = 2.0
    m: int = 5
    kappa: int = 10

    def __post_init__(self):
        if self.p <= 0:
            raise ValidationError(f"power p must be positive, got {self.p}")
        if self.m < 2:
            raise ValidationError(f"bandwidth m must be >= 2, got {self.m}")
        if self.kappa < 2:
            raise ValidationError(f"kappa must be an integer >= 2, got {self.kappa}")

    @classmethod
    def smooth(cls, p: float = 2.0, kappa: int = 10) -> "EstimatorConfig":
        return cls(p=p, m=2, kappa=kappa)


@dataclass
class FractalEstimate:
    """Point estimate of the fractal index with its regression diagnostics."""

    alpha_hat: float
    slope: float
    s_p_hat: float
    config: EstimatorConfig
    n: int
    robust: bool = False

    @property
    def clt_regime_valid(self) -> bool:
        """Whether alpha_hat sits where the sqrt(n) normal limit applies."""
        return -0.5 < self.alpha_hat < CLT_ALPHA_MAX


def design_vector(m: int) -> np.ndarray:
    """Centered log-lag regressor (log k - mean log 1..m), k = 1..m."""
    if m < 2:
        raise ValidationError(f"bandwidth m must be >= 2, got {m}")
    logs = np.log(np.arange(1, m + 1, dtype=np.float64))
    return logs - logs.mean()


def _ols_slope(log_values: np.ndarray) -> float:
    x = design_vector(log_values.shape[0])
    return float(x @ log_values / (x @ x))


def alpha_from_variograms(values, p: float) -> float:
    """Fractal index from precomputed variogram values at lags 1..m.

    Injection seam: lets tests and callers run the regression on exact or
    synthetic variogram values without touching any path data.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] < 2:
        raise ValidationError("need variogram values at m >= 2 lags")
    if np.any(values <= 0):
        raise DegenerateVariogramError(
            "degenerate variogram: some value is zero or negative, log undefined"
        )
    return _ols_slope(np.log(values)) / p - 0.5


def alpha_from_variograms_robust(values, scaled_values, p: float) -> float:
    """Noise-robust index from variogram values at lags 1..m and kappa..kappa*m.

    Second injection seam; feeds the kappa-differenced statistic
    scaled^(2/p) - base^(2/p) into the same regression and divides the slope
    by 2 (not p).
    """
    base = np.asarray(values, dtype=np.float64)
    scaled = np.asarray(scaled_values, dtype=np.float64)
    if base.shape != scaled.shape or base.ndim != 1 or base.shape[0] < 2:
        raise ValidationError("need aligned variogram values at m >= 2 lags")
    gaps = scaled ** (2.0 / p) - base ** (2.0 / p)
    if np.any(gaps <= 0):
        raise NonpositiveGapError(
            "robust statistic nonpositive at some lag: increase kappa or n"
        )
    return _ols_slope(np.log(gaps)) / 2.0 - 0.5


def estimate_sp(path, p: float) -> float:
    """Heteroskedasticity factor estimate from the lag-1 variograms,

        sqrt(gamma_2p(1/n) / m_2p) / (gamma_p(1/n) / m_p),

    which tends to 1 for Gaussian data and to sqrt(int sigma^2p)/int sigma^p
    under stochastic volatility.
    """
    x = as_values(path)
    g = empirical_variogram_lags(x, p, [1])[0]
    g2 = empirical_variogram_lags(x, 2.0 * p, [1])[0]
    if g <= 0 or g2 <= 0:
        raise DegenerateVariogramError("degenerate variogram: constant path at lag 1")
    return float(np.sqrt(g2 / moment_constant(2.0 * p)) / (g / moment_constant(p)))


def estimate_alpha(path, config: EstimatorConfig | None = None) -> FractalEstimate:
    """OLS estimate of the fractal index from log variograms at lags 1..m."""
    config = config or EstimatorConfig()
    x = as_values(path)
    n = x.shape[0]
    if config.m > n - 1:
        raise ValidationError(f"bandwidth m={config.m} needs n >= m+1, got n={n}")
    values = empirical_variogram_lags(x, config.p, np.arange(1, config.m + 1))
    if np.any(values <= 0):
        raise DegenerateVariogramError("degenerate variogram: constant path at some lag")
    slope = _ols_slope(np.log(values))
    return FractalEstimate(
        alpha_hat=slope / config.p - 0.5,
        slope=slope,
        s_p_hat=estimate_sp(x, config.p),
        config=config,
        n=n,
        robust=False,
    )


def estimate_alpha_robust(path, config: EstimatorConfig | None = None) -> FractalEstimate:
    """Noise-robust OLS estimate from the kappa-differenced statistic."""
    config = config or EstimatorConfig()
    x = as_values(path)
    n = x.shape[0]
    if config.m * config.kappa > n - 1:
        raise ValidationError(
            f"need m*kappa <= n-1; got m={config.m}, kappa={config.kappa}, n={n}"
        )
    lags = np.arange(1, config.m + 1)
    base = empirical_variogram_lags(x, config.p, lags)
    scaled = empirical_variogram_lags(x, config.p, config.kappa * lags)
    gaps = scaled ** (2.0 / config.p) - base ** (2.0 / config.p)
    if np.any(gaps <= 0):
        raise NonpositiveGapError(
            "robust statistic nonpositive: increase kappa or n "
            "(noise may dominate the signal at these lags)"
        )
    slope = _ols_slope(np.log(gaps))
    return FractalEstimate(
        alpha_hat=slope / 2.0 - 0.5,
        slope=slope,
        s_p_hat=estimate_sp(x, config.p),
        config=config,
        n=n,
        robust=True,
    )
