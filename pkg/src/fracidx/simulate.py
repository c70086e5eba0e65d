"""Exact Gaussian path simulation via circulant embedding, plus the
volatility-modulated moving-average simulator and additive observation noise.

Fractional Brownian motion is generated by the Davies-Harte method
(Davies & Harte 1987; Dieker 2004): embed the fractional-Gaussian-noise
covariance in a circulant matrix, take its FFT eigenvalues, and synthesize
Gaussian samples in the frequency domain.  One complex synthesis yields two
independent real samples (real and imaginary parts), which the Monte Carlo
engines exploit.

General stationary models use the same embedding with the model
autocorrelation evaluated on the observation grid, padded to a power of two.
Padding may be grown up to roughly 8n; if the embedding still has
significantly negative eigenvalues we fail loudly rather than clip, since a
clipped law would silently bias every downstream Monte Carlo table.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gamma as gamma_fn
from scipy.special import gammainc

from .errors import EmbeddingError, ValidationError
from .models import FBM, GaussianModel, NoiseSpec, Path, fgn_correlation
from .seeding import as_generator, substream

_EIG_TOL = 1e-8


def _next_pow2(x: int) -> int:
    return 1 << max(1, int(math.ceil(math.log2(max(2, x)))))


# ---------------------------------------------------------------------------
# circulant embedding internals
# ---------------------------------------------------------------------------

def _embedding_row(acf_values: np.ndarray) -> np.ndarray:
    # acf_values holds r(0) .. r(M/2); mirror into a length-M circulant row
    return np.concatenate([acf_values, acf_values[-2:0:-1]])


@lru_cache(maxsize=128)
def _fgn_eigs(alpha: float, n: int) -> tuple[np.ndarray, int]:
    """FFT eigenvalues of the fGn circulant embedding for n increments."""
    m = _next_pow2(2 * (n - 1))
    r = fgn_correlation(np.arange(m // 2 + 1), alpha)
    eigs = np.fft.fft(_embedding_row(r)).real
    worst = eigs.min()
    if worst < -_EIG_TOL * eigs.max():
        raise EmbeddingError(
            f"internal: fGn embedding produced eigenvalue {worst:.3e}; "
            "this should be impossible for fGn"
        )
    np.clip(eigs, 0.0, None, out=eigs)
    eigs.flags.writeable = False
    return eigs, m


@lru_cache(maxsize=64)
def _stationary_eigs(model: GaussianModel, n: int) -> tuple[np.ndarray, int]:
    """Eigenvalues for a stationary model on the grid k/n, padded as needed.

    Padding doubles until the embedding is nonnegative definite, up to 64n.
    The tolerance is relative to the mean eigenvalue (= the process
    variance): long-memory spectra concentrate enormous mass at frequency
    zero, so a tolerance relative to the largest eigenvalue would wave
    through embeddings whose many small negative eigenvalues carry enough
    clipped mass to visibly distort small-lag variograms.
    """
    base = _next_pow2(2 * (n - 1))
    cap = _next_pow2(64 * n)
    m = base
    worst = np.inf
    while m <= cap:
        r = model.acf(np.arange(m // 2 + 1) / n)
        eigs = np.fft.fft(_embedding_row(r)).real
        worst = eigs.min()
        if worst >= -_EIG_TOL * eigs.mean():
            np.clip(eigs, 0.0, None, out=eigs)
            eigs.flags.writeable = False
            return eigs, m
        m *= 2
    raise EmbeddingError(
        f"circulant embedding for {model} is not nonnegative definite up to "
        f"padding {cap}; most negative eigenvalue {worst:.6e}"
    )


def _synthesize_pair(eigs: np.ndarray, m: int, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Two independent stationary samples of length n from one FFT."""
    z = rng.standard_normal((2, m))
    y = np.fft.fft((z[0] + 1j * z[1]) * np.sqrt(eigs)) / math.sqrt(m)
    return y.real[:n], y.imag[:n]


def _fgn_to_fbm(fgn: np.ndarray, alpha: float, n: int) -> np.ndarray:
    # unit-spacing fGn -> fBm on the grid i/n, i = 1..n
    return np.cumsum(fgn, axis=-1) * float(n) ** -(alpha + 0.5)


def fbm_batch(alpha: float, n: int, sequences) -> np.ndarray:
    """Stack of independent fBm paths, two per seed sequence.

    Used by the Monte Carlo variance engines; row 2j is the real part and
    row 2j+1 the imaginary part of the j-th synthesis, so the output is
    bit-reproducible for a fixed list of sequences regardless of chunking.
    """
    eigs, m = _fgn_eigs(float(alpha), int(n))
    out = np.empty((2 * len(sequences), n))
    for j, seq in enumerate(sequences):
        rng = np.random.Generator(np.random.PCG64(seq))
        a, b = _synthesize_pair(eigs, m, n, rng)
        out[2 * j] = a
        out[2 * j + 1] = b
    return _fgn_to_fbm(out, alpha, n)


# ---------------------------------------------------------------------------
# public simulators
# ---------------------------------------------------------------------------

def simulate_fbm(n: int, alpha: float, seed) -> Path:
    """Fractional Brownian motion on [0,1] with Hurst index alpha + 1/2.

    Returns X_{1/n}, ..., X_1 with the exact Gaussian law (X_0 = 0 is not
    included).  Deterministic given the seed.
    """
    if n < 2:
        raise ValidationError(f"need n >= 2 observations, got {n}")
    if not -0.5 < alpha < 0.5:
        raise ValidationError(f"alpha must lie in (-1/2, 1/2), got {alpha}")
    rng = as_generator(seed, "fbm")
    eigs, m = _fgn_eigs(float(alpha), int(n))
    fgn, _ = _synthesize_pair(eigs, m, n, rng)
    return Path(
        _fgn_to_fbm(fgn, alpha, n),
        annotations={"model": FBM, "alpha": alpha, "n": n, "seed": seed},
    )


def simulate_stationary_gaussian(model: GaussianModel, n: int, seed) -> Path:
    """Zero-mean unit-variance stationary path on the grid k/n."""
    if not model.is_stationary:
        raise ValidationError("fBm is nonstationary; use simulate_fbm")
    if n < 2:
        raise ValidationError(f"need n >= 2 observations, got {n}")
    rng = as_generator(seed, "stationary")
    eigs, m = _stationary_eigs(model, int(n))
    values, _ = _synthesize_pair(eigs, m, n, rng)
    return Path(
        values,
        annotations={
            "model": model.kind,
            "alpha": model.alpha,
            "beta": model.beta,
            "tau": model.tau,
            "n": n,
            "seed": seed,
        },
    )


def stationary_batch(model: GaussianModel, n: int, sequences) -> np.ndarray:
    """Stack of independent stationary paths, two per seed sequence."""
    eigs, m = _stationary_eigs(model, int(n))
    out = np.empty((2 * len(sequences), n))
    for j, seq in enumerate(sequences):
        rng = np.random.Generator(np.random.PCG64(seq))
        a, b = _synthesize_pair(eigs, m, n, rng)
        out[2 * j] = a
        out[2 * j + 1] = b
    return out


def gamma_kernel_weights(alpha: float, lam: float, n: int) -> np.ndarray:
    """Discretized moving-average weights for the kernel x^alpha * exp(-lam x).

    The kernel is truncated at T = max(1, 10/lam) and each width-1/n cell
    carries the root-mean-square of the kernel over the cell, i.e. the exact
    cell integral of x^(2*alpha) * exp(-2*lam*x).  This tames the x^alpha
    singularity in the first cell and keeps every cell's variance
    contribution exact, which is what the small-lag variogram (and hence the
    index estimate) is sensitive to.
    """
    t_trunc = max(1.0, 10.0 / lam)
    j_count = int(math.ceil(t_trunc * n))
    edges = np.arange(j_count + 1, dtype=np.float64) / n
    a = 2.0 * alpha + 1.0
    cell = gamma_fn(a) * (2.0 * lam) ** -a * np.diff(gammainc(a, 2.0 * lam * edges))
    return np.sqrt(n * cell)


def simulate_gamma_bss(alpha: float, lam: float, vol, n: int, seed) -> Path:
    """Volatility-modulated moving average of Brownian increments with the
    gamma kernel g(x) = x^alpha * exp(-lam * x).

    The integral is approximated by a truncated Riemann sum on the 1/n grid
    (see gamma_kernel_weights); the volatility path is sampled at the left
    endpoint of each increment cell, preserving adaptedness.
    """
    if n < 2:
        raise ValidationError(f"need n >= 2 observations, got {n}")
    if not -0.5 < alpha < 0.5:
        raise ValidationError(f"alpha must lie in (-1/2, 1/2), got {alpha}")
    if lam <= 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    if isinstance(seed, (int, np.integer)):
        rng_vol = substream(int(seed), "bss-vol")
        rng_w = substream(int(seed), "bss-w")
    else:
        rng_vol = rng_w = as_generator(seed, "bss")
    w = gamma_kernel_weights(alpha, lam, n)
    j_count = w.shape[0]
    # increment cells k = 1-J .. n; sigma at each cell's left endpoint
    s_left = np.arange(-j_count, n) / n
    sigma = vol.sample(s_left, rng_vol)
    if np.any(sigma <= 0):
        raise ValidationError("volatility path must be strictly positive")
    dw = rng_w.standard_normal(n + j_count) / math.sqrt(n)
    conv = fftconvolve(sigma * dw, w)
    values = conv[j_count : j_count + n]
    return Path(
        values,
        annotations={
            "model": "gamma-bss",
            "alpha": alpha,
            "lambda": lam,
            "vol": repr(vol),
            "n": n,
            "seed": seed,
        },
    )


def add_noise(path: Path, spec: NoiseSpec, seed) -> Path:
    """Observation process mu + X + u with u iid N(0, sigma_u2).

    With sigma_u2 = 0 the output is exactly mu + X and no random numbers are
    consumed.
    """
    values = path.values + spec.mu
    if spec.sigma_u2 > 0:
        rng = as_generator(seed, "noise")
        values = values + math.sqrt(spec.sigma_u2) * rng.standard_normal(path.n)
    annotations = dict(path.annotations)
    annotations.update({"noise_mu": spec.mu, "noise_sigma_u2": spec.sigma_u2, "noise_seed": seed})
    return Path(values, annotations=annotations)
