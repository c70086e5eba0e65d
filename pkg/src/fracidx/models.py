"""Domain types: sampled paths, Gaussian process models, volatility models,
and additive-noise specifications.

The stationary Gaussian family is parametrized by a fractal index
``alpha`` in (-1/2, 1/2) and a scale ``beta > 0``; the Cauchy and Dagum
classes carry an extra shape ``tau``.  All autocorrelations behave like
``rho(x) = 1 - c*x^(2*alpha+1) + o(...)`` near zero, which is what makes the
lag-power regression identify ``alpha``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import kv

from .errors import ValidationError

FBM = "fbm"
MATERN = "matern"
POWERED_EXPONENTIAL = "powexp"
CAUCHY = "cauchy"
DAGUM = "dagum"

MODEL_KINDS = (FBM, MATERN, POWERED_EXPONENTIAL, CAUCHY, DAGUM)

_ALIASES = {
    "fbm": FBM,
    "matern": MATERN,
    "powexp": POWERED_EXPONENTIAL,
    "powered_exponential": POWERED_EXPONENTIAL,
    "powered-exponential": POWERED_EXPONENTIAL,
    "cauchy": CAUCHY,
    "dagum": DAGUM,
}


def normalize_kind(kind: str) -> str:
    try:
        return _ALIASES[kind.strip().lower()]
    except KeyError:
        raise ValidationError(
            f"unknown model kind {kind!r}; expected one of {', '.join(MODEL_KINDS)}"
        ) from None


# ---------------------------------------------------------------------------
# Path
# ---------------------------------------------------------------------------

@dataclass
class Path:
    """n equidistant observations X_{1/n}, ..., X_1 on the unit interval."""

    values: np.ndarray
    annotations: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.shape[0] < 2:
            raise ValidationError("a path needs at least 2 observations")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("path contains non-finite values")

    @property
    def n(self) -> int:
        return int(self.values.shape[0])


def as_values(path) -> np.ndarray:
    """Accept a Path or any 1-D array-like and return float64 values."""
    if isinstance(path, Path):
        return path.values
    values = np.asarray(path, dtype=np.float64)
    if values.ndim != 1:
        raise ValidationError("expected a 1-D sequence of observations")
    return values


# ---------------------------------------------------------------------------
# fGn correlation
# ---------------------------------------------------------------------------

def fgn_correlation(j, alpha: float):
    """Correlation at integer lag j of the unit-spacing increments of a
    fractal process with index alpha (fractional Gaussian noise form):

        r(j) = ((|j+1|^(2a+1) - 2|j|^(2a+1) + |j-1|^(2a+1)) / 2,  a = alpha.

    Returns 1 at j = 0.
    """
    if not -0.5 < alpha < 0.5:
        raise ValidationError(f"alpha must lie in (-1/2, 1/2), got {alpha}")
    j = np.asarray(j, dtype=np.float64)
    e = 2.0 * alpha + 1.0
    out = 0.5 * (np.abs(j + 1.0) ** e - 2.0 * np.abs(j) ** e + np.abs(j - 1.0) ** e)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Gaussian models
# ---------------------------------------------------------------------------

# index ranges under which the normal-limit (CLT) results stay valid; the
# plain consistency ranges are wider (see validate()).
_CLT_RANGES = {
    FBM: (-0.5, 0.25),
    MATERN: (-0.5, 0.25),
    POWERED_EXPONENTIAL: (-0.25, 0.5),
    CAUCHY: (-0.25, 0.5),
}


@dataclass(frozen=True)
class GaussianModel:
    """A parametric stationary Gaussian fractal model (or fBm)."""

    kind: str
    alpha: float
    beta: float = 1.0
    tau: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", normalize_kind(self.kind))
        if not -0.5 < self.alpha < 0.5:
            raise ValidationError(f"alpha must lie in (-1/2, 1/2), got {self.alpha}")
        if self.beta <= 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        if self.kind == CAUCHY:
            if self.tau is None or self.tau <= 0:
                raise ValidationError("Cauchy model needs tau > 0")
        elif self.kind == DAGUM:
            if self.tau is None or not -0.5 < self.tau < 0.5:
                raise ValidationError("Dagum model needs tau in (-1/2, 1/2)")
            if not self.alpha < self.tau:
                raise ValidationError("Dagum model needs alpha < tau")
        elif self.tau is not None:
            raise ValidationError(f"tau is not a parameter of the {self.kind} model")

    @property
    def is_stationary(self) -> bool:
        return self.kind != FBM

    def clt_range_ok(self) -> bool:
        """Whether the parameters sit inside the normal-limit validity range."""
        if self.kind == DAGUM:
            return -0.25 <= self.tau < 0.5
        lo, hi = _CLT_RANGES[self.kind]
        return lo < self.alpha < hi

    def warn_if_outside_clt_range(self) -> None:
        if not self.clt_range_ok():
            warnings.warn(
                f"{self.kind} parameters are outside the range where the "
                "normal-limit inference results apply; point estimates stay "
                "consistent but standard errors may not.",
                stacklevel=2,
            )

    def acf(self, x):
        """Autocorrelation rho(x) at distance x >= 0 (vectorized)."""
        if self.kind == FBM:
            raise ValidationError(
                "fBm is nonstationary and has no autocorrelation function; "
                "use simulate_fbm instead"
            )
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        x = np.atleast_1d(np.abs(x))
        if np.any(x < 0):
            raise ValidationError("distances must be nonnegative")
        bx = self.beta * x
        e = 2.0 * self.alpha + 1.0
        if self.kind == MATERN:
            nu = self.alpha + 0.5
            out = np.ones_like(bx)
            pos = bx > 0
            z = bx[pos]
            out[pos] = (2.0 ** (1.0 - nu) / gamma_fn(nu)) * z**nu * kv(nu, z)
        elif self.kind == POWERED_EXPONENTIAL:
            out = np.exp(-(bx**e))
        elif self.kind == CAUCHY:
            out = (1.0 + bx**e) ** (-self.tau / e)
        else:  # DAGUM
            et = 2.0 * self.tau + 1.0
            u = bx**et
            out = 1.0 - (u / (1.0 + u)) ** (e / et)
        return float(out[0]) if scalar else out


def model_acf(model: GaussianModel, x):
    """Autocorrelation of a stationary Gaussian model at distance x."""
    return model.acf(x)


# ---------------------------------------------------------------------------
# Volatility models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantVol:
    """sigma_s = level everywhere."""

    level: float = 1.0

    def __post_init__(self):
        if self.level <= 0:
            raise ValidationError("volatility level must be positive")

    def sample(self, s: np.ndarray, rng) -> np.ndarray:
        return np.full(s.shape, self.level)


@dataclass(frozen=True)
class TwoRegimeVol:
    """sigma_s = level1 for s <= switch (including the pre-history s < 0),
    level2 afterwards."""

    level1: float = 1.0
    level2: float = 2.0
    switch: float = 0.5

    def __post_init__(self):
        if self.level1 <= 0 or self.level2 <= 0:
            raise ValidationError("volatility levels must be positive")
        if not 0.0 < self.switch < 1.0:
            raise ValidationError("switch time must lie in (0, 1)")

    def sample(self, s: np.ndarray, rng) -> np.ndarray:
        return np.where(s <= self.switch, self.level1, self.level2)


@dataclass(frozen=True)
class SmoothOUVol:
    """Exponential of a moving-average-smoothed Ornstein-Uhlenbeck path.

    The smoothing window has fixed physical width, so the resulting sigma
    path is Lipschitz in time; ``xi`` records the Hoelder exponent claimed
    for it (1.0 for this construction) so callers can check the CLT moment
    condition xi * min(p, 1) > 1/2 before trusting standard errors.
    """

    mean: float = 0.0
    rate: float = 1.0
    vol: float = 0.5
    xi: float = 1.0
    window: float = 0.05

    def __post_init__(self):
        if self.rate <= 0 or self.vol <= 0:
            raise ValidationError("OU rate and vol must be positive")
        if not 0.0 < self.xi <= 1.0:
            raise ValidationError("xi must lie in (0, 1]")
        if self.window <= 0:
            raise ValidationError("smoothing window must be positive")

    def clt_condition_ok(self, p: float) -> bool:
        return self.xi * min(p, 1.0) > 0.5

    def sample(self, s: np.ndarray, rng) -> np.ndarray:
        dt = float(s[1] - s[0])
        # exact OU transition, started from the stationary law
        sd_stat = self.vol / np.sqrt(2.0 * self.rate)
        a = np.exp(-self.rate * dt)
        innov_sd = sd_stat * np.sqrt(1.0 - a * a)
        z = rng.standard_normal(s.shape[0])
        v = np.empty(s.shape[0])
        v[0] = self.mean + sd_stat * z[0]
        for i in range(1, s.shape[0]):
            v[i] = self.mean + a * (v[i - 1] - self.mean) + innov_sd * z[i]
        w = max(1, int(round(self.window / dt)))
        kern = np.full(w, 1.0 / w)
        smoothed = np.convolve(np.pad(v, (w - 1, 0), mode="edge"), kern, mode="valid")
        return np.exp(smoothed)


VOL_KINDS = {"constant": ConstantVol, "tworegime": TwoRegimeVol, "smoothou": SmoothOUVol}


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseSpec:
    """Additive observation noise: Z = mu + X + u, u iid N(0, sigma_u2)."""

    mu: float = 0.0
    sigma_u2: float = 0.0

    def __post_init__(self):
        if self.sigma_u2 < 0:
            raise ValidationError("noise variance must be nonnegative")
