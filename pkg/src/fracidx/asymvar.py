"""Monte Carlo engine for the asymptotic covariances of the log-variogram
regressions, the delta-method matrices that map them into estimator
variances, and a disk cache for the (expensive) matrices.

The normalized covariance matrix over a set of lags is estimated by
simulating B fractional Brownian paths of length n_inner, computing their
empirical variograms at each lag, and scaling the sample covariance by
n_inner after normalizing each lag by its theoretical fBm variogram.  With
n_inner large this approximates the limit matrix; with n_inner set to the
sample size at hand it is the finite-sample analogue, which is what the
bandwidth studies use.

Replications are deterministic: replication b draws from the substream
(master_seed, "lambda-mc", b // 2), two replications per synthesis, and the
partial sums are reduced in fixed chunk order, so results are bit-identical
for any worker count.
"""

from __future__ import annotations

import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .estimate import design_vector
from .kernels import variogram_lags_batch
from .seeding import child_sequence
from .simulate import fbm_batch
from .variogram import fbm_variogram

_PSD_TOL = 1e-8
CACHE_ENV_VAR = "FRACIDX_CACHE_DIR"
_CACHE_MAGIC = "# fracidx lambda cache v1"


# ---------------------------------------------------------------------------
# lag index set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LagIndexSet:
    """Lags {1..m} united with {k*kappa, ..., m*kappa} where k* is the
    smallest integer with k* * kappa > m."""

    m: int
    kappa: int
    k_star: int
    members: tuple

    def positions(self) -> dict:
        return {lag: i for i, lag in enumerate(self.members)}


def lag_index_set(m: int, kappa: int) -> LagIndexSet:
    if m < 2 or kappa < 2:
        raise ValidationError(f"need m >= 2 and kappa >= 2, got m={m}, kappa={kappa}")
    k_star = m // kappa + 1
    members = tuple(range(1, m + 1)) + tuple(k * kappa for k in range(k_star, m + 1))
    return LagIndexSet(m=m, kappa=kappa, k_star=k_star, members=members)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

@dataclass
class LambdaMatrix:
    """Normalized asymptotic covariance of variogram ratios over a lag set."""

    entries: np.ndarray
    lags: tuple
    alpha: float
    p: float
    n_inner: int
    B: int
    master_seed: int

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        k = len(self.lags)
        if self.entries.shape != (k, k):
            raise ValidationError("covariance matrix does not match its lag set")
        if not np.all(np.isfinite(self.entries)):
            raise ValidationError("covariance matrix has non-finite entries")
        sym_err = np.max(np.abs(self.entries - self.entries.T))
        if sym_err > 1e-10 * max(1.0, np.max(np.abs(self.entries))):
            raise ValidationError(f"covariance matrix asymmetric by {sym_err:.3e}")
        if np.any(np.diag(self.entries) <= 0):
            raise ValidationError("covariance matrix needs positive diagonal")
        w = np.linalg.eigvalsh(self.entries)
        if w.min() < -_PSD_TOL * max(1.0, w.max()):
            raise ValidationError(f"covariance matrix not PSD: min eigenvalue {w.min():.3e}")


@dataclass
class DeltaMatrix:
    """Delta-method Jacobian from variogram-ratio deviations to log statistics."""

    entries: np.ndarray
    flavor: str  # "Sigma1" (robust level) or "Sigma2" (robust-minus-plain)
    m: int
    lags: tuple

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        if self.entries.shape != (self.m, len(self.lags)):
            raise ValidationError("delta matrix shape does not match (m, |lag set|)")


# ---------------------------------------------------------------------------
# Monte Carlo core
# ---------------------------------------------------------------------------

def _chunk_modes(total_pairs: int, chunk_pairs: int):
    starts = range(0, total_pairs, chunk_pairs)
    return [(s, min(s + chunk_pairs, total_pairs)) for s in starts]


def mc_normalized_cov(
    alpha: float,
    p: float,
    lags,
    n_inner: int,
    B: int,
    master_seed: int,
    chunk: int = 256,
    workers: int = 1,
) -> np.ndarray:
    """n_inner * Cov of variogram ratios gamma_hat/gamma over the lag set."""
    lags = np.asarray(lags, dtype=np.int64)
    if B < 2:
        raise ValidationError(f"need at least B=2 replications, got {B}")
    if n_inner <= int(lags.max()):
        raise ValidationError(f"n_inner={n_inner} must exceed the largest lag {lags.max()}")
    theory = np.array([fbm_variogram(p, k / n_inner, alpha) for k in lags])
    n_pairs = (B + 1) // 2
    chunk_pairs = max(1, chunk // 2)

    def one_chunk(bounds):
        lo, hi = bounds
        seqs = [child_sequence(master_seed, "lambda-mc", j) for j in range(lo, hi)]
        paths = fbm_batch(alpha, n_inner, seqs)
        if hi == n_pairs and B % 2 == 1:
            paths = paths[:-1]
        dev = variogram_lags_batch(paths, lags, p) / theory - 1.0
        return dev.sum(axis=0), dev.T @ dev, dev.shape[0]

    bounds = _chunk_modes(n_pairs, chunk_pairs)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(one_chunk, bounds))
    else:
        partials = [one_chunk(b) for b in bounds]

    s1 = np.zeros(lags.shape[0])
    s2 = np.zeros((lags.shape[0], lags.shape[0]))
    count = 0
    for p1, p2, c in partials:
        s1 += p1
        s2 += p2
        count += c
    assert count == B
    cov = (s2 - np.outer(s1, s1) / B) / (B - 1)
    cov = 0.5 * (cov + cov.T)
    return n_inner * cov


def mc_lambda(
    alpha: float,
    p: float,
    m: int,
    n_inner: int = 10_000,
    B: int = 10_000,
    master_seed: int = 0,
    chunk: int = 256,
    workers: int = 1,
) -> LambdaMatrix:
    """Monte Carlo covariance matrix over lags 1..m (plain estimator)."""
    if m < 2:
        raise ValidationError(f"bandwidth m must be >= 2, got {m}")
    lags = tuple(range(1, m + 1))
    entries = mc_normalized_cov(alpha, p, lags, n_inner, B, master_seed, chunk, workers)
    return LambdaMatrix(entries, lags, alpha, p, n_inner, B, master_seed)


def mc_lambda_star(
    alpha: float,
    p: float,
    m: int,
    kappa: int,
    n_inner: int = 10_000,
    B: int = 10_000,
    master_seed: int = 0,
    chunk: int = 256,
    workers: int = 1,
) -> LambdaMatrix:
    """Covariance matrix over the extended lag set used by the robust theory."""
    members = lag_index_set(m, kappa).members
    if members[-1] >= n_inner:
        raise ValidationError(f"need m*kappa < n_inner, got {members[-1]} >= {n_inner}")
    entries = mc_normalized_cov(alpha, p, members, n_inner, B, master_seed, chunk, workers)
    return LambdaMatrix(entries, members, alpha, p, n_inner, B, master_seed)


# ---------------------------------------------------------------------------
# delta-method matrices and scalar variances
# ---------------------------------------------------------------------------

def sigma1_matrix(alpha: float, p: float, m: int, kappa: int) -> DeltaMatrix:
    """Jacobian of the log kappa-differenced statistic at lags 1..m.

    Row i carries -c at the column of lag i and +c*kappa^(2*alpha+1) at the
    column of lag i*kappa, with c = 2 / (p * (kappa^(2*alpha+1) - 1)).
    """
    ls = lag_index_set(m, kappa)
    pos = ls.positions()
    ratio = float(kappa) ** (2.0 * alpha + 1.0)
    c = 2.0 / (p * (ratio - 1.0))
    entries = np.zeros((m, len(ls.members)))
    for i in range(1, m + 1):
        entries[i - 1, pos[i]] = -c
        entries[i - 1, pos[i * kappa]] = c * ratio
    return DeltaMatrix(entries, "Sigma1", m, ls.members)


def sigma2_matrix(alpha: float, p: float, m: int, kappa: int) -> DeltaMatrix:
    """Jacobian of log(f_hat / gamma_hat^(2/p)), the robust-minus-plain gap.

    Same sparsity as sigma1_matrix but with entries -c and +c, where
    c = 2*kappa^(2*alpha+1) / (p * (kappa^(2*alpha+1) - 1)).
    """
    ls = lag_index_set(m, kappa)
    pos = ls.positions()
    ratio = float(kappa) ** (2.0 * alpha + 1.0)
    c = 2.0 * ratio / (p * (ratio - 1.0))
    entries = np.zeros((m, len(ls.members)))
    for i in range(1, m + 1):
        entries[i - 1, pos[i]] = -c
        entries[i - 1, pos[i * kappa]] = c
    return DeltaMatrix(entries, "Sigma2", m, ls.members)


def sigma2_mp(lam: LambdaMatrix, m: int, p: float) -> float:
    """Scalar asymptotic variance x' Lambda x / ((x'x)^2 p^2) of the plain
    estimator with bandwidth m."""
    if tuple(lam.lags) != tuple(range(1, m + 1)):
        raise ValidationError("covariance matrix must be indexed by lags 1..m")
    x = design_vector(m)
    xx = float(x @ x)
    return float(x @ lam.entries @ x) / (xx * xx * p * p)


def _delta_quadratic(lam_star: LambdaMatrix, delta: DeltaMatrix, m: int) -> float:
    if tuple(lam_star.lags) != tuple(delta.lags):
        raise ValidationError("delta matrix and covariance matrix lag sets differ")
    if delta.m != m:
        raise ValidationError("delta matrix bandwidth mismatch")
    x = design_vector(m)
    xx = float(x @ x)
    core = delta.entries @ lam_star.entries @ delta.entries.T
    return float(x @ core @ x) / (4.0 * xx * xx)


def sigma2_star(lam_star: LambdaMatrix, sigma1: DeltaMatrix, m: int, p: float) -> float:
    """Asymptotic variance of the noise-robust estimator (no-noise regime)."""
    if sigma1.flavor != "Sigma1":
        raise ValidationError("expected a Sigma1 delta matrix")
    return _delta_quadratic(lam_star, sigma1, m)


def sigma2_dstar(lam_star: LambdaMatrix, sigma2: DeltaMatrix, m: int, p: float) -> float:
    """Asymptotic variance of the difference robust-minus-plain estimator."""
    if sigma2.flavor != "Sigma2":
        raise ValidationError("expected a Sigma2 delta matrix")
    return _delta_quadratic(lam_star, sigma2, m)


# ---------------------------------------------------------------------------
# disk cache + engine
# ---------------------------------------------------------------------------

def default_cache_dir() -> str:
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return env
    return os.path.join(os.path.expanduser("~"), ".cache", "fracidx")


def _cache_name(kind, alpha, p, m, kappa, n_inner, B, master_seed) -> str:
    return (
        f"{kind}_a{alpha:+.4f}_p{p:g}_m{m}_k{kappa}_n{n_inner}_B{B}_s{master_seed}.txt"
    )


def _write_cache(path: str, header: dict, entries: np.ndarray) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    lines = [_CACHE_MAGIC]
    for key, value in header.items():
        lines.append(f"# {key}: {value}")
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write("\n".join(lines) + "\n")
            np.savetxt(fh, entries, fmt="%.17e")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_cache(path: str, expect_header: dict) -> np.ndarray | None:
    try:
        with open(path) as fh:
            first = fh.readline().rstrip("\n")
            if first != _CACHE_MAGIC:
                return None
            header = {}
            pos = fh.tell()
            line = fh.readline()
            while line.startswith("#"):
                key, _, value = line[1:].partition(":")
                header[key.strip()] = value.strip()
                pos = fh.tell()
                line = fh.readline()
            fh.seek(pos)
            for key, value in expect_header.items():
                if header.get(key) != str(value):
                    return None
            entries = np.loadtxt(fh, ndmin=2)
    except (OSError, ValueError):
        return None
    k = len(str(expect_header["lags"]).split())
    if entries.shape != (k, k) or not np.all(np.isfinite(entries)):
        return None
    return entries


@dataclass
class VarianceEngine:
    """Cached access to the Monte Carlo covariance matrices and the scalar
    variances built from them.

    The index alpha is rounded to 1e-4 before evaluation; that rounding is
    also the disk-cache key, so identical requests hit the cache across
    processes.  Matrices depend on (alpha, p, m[, kappa], n_inner, B,
    master_seed) and on nothing else.
    """

    n_inner: int = 10_000
    B: int = 10_000
    master_seed: int = 1833
    cache_dir: str | None = None
    use_disk_cache: bool = True
    chunk: int = 256
    workers: int = 1
    _memo: dict = field(default_factory=dict, repr=False)

    def _resolve_dir(self) -> str:
        return self.cache_dir or default_cache_dir()

    def _matrix(self, kind: str, alpha: float, p: float, m: int, kappa: int) -> LambdaMatrix:
        alpha = round(float(alpha), 4)
        if not -0.5 < alpha < 0.5:
            raise ValidationError(f"variance evaluation needs alpha in (-1/2, 1/2), got {alpha}")
        key = (kind, alpha, float(p), int(m), int(kappa), self.n_inner, self.B, self.master_seed)
        if key in self._memo:
            return self._memo[key]
        if kind == "lambda":
            lags = tuple(range(1, m + 1))
        else:
            lags = lag_index_set(m, kappa).members
        header = {
            "kind": kind,
            "alpha": f"{alpha:+.4f}",
            "p": f"{p:g}",
            "m": m,
            "kappa": kappa,
            "n_inner": self.n_inner,
            "B": self.B,
            "master_seed": self.master_seed,
            "lags": " ".join(str(lag) for lag in lags),
        }
        path = os.path.join(
            self._resolve_dir(),
            _cache_name(kind, alpha, p, m, kappa, self.n_inner, self.B, self.master_seed),
        )
        entries = None
        if self.use_disk_cache and os.path.exists(path):
            entries = _read_cache(path, header)
        if entries is None:
            entries = mc_normalized_cov(
                alpha, p, lags, self.n_inner, self.B, self.master_seed,
                chunk=self.chunk, workers=self.workers,
            )
            if self.use_disk_cache:
                _write_cache(path, header, entries)
        lam = LambdaMatrix(entries, lags, alpha, p, self.n_inner, self.B, self.master_seed)
        self._memo[key] = lam
        return lam

    def lambda_matrix(self, alpha: float, p: float, m: int) -> LambdaMatrix:
        return self._matrix("lambda", alpha, p, m, 0)

    def lambda_star_matrix(self, alpha: float, p: float, m: int, kappa: int) -> LambdaMatrix:
        if kappa < 2:
            raise ValidationError(f"kappa must be >= 2, got {kappa}")
        return self._matrix("lambda-star", alpha, p, m, kappa)

    def sigma2(self, alpha: float, p: float, m: int) -> float:
        return sigma2_mp(self.lambda_matrix(alpha, p, m), m, p)

    def sigma2_star(self, alpha: float, p: float, m: int, kappa: int) -> float:
        alpha = round(float(alpha), 4)
        lam = self.lambda_star_matrix(alpha, p, m, kappa)
        return sigma2_star(lam, sigma1_matrix(alpha, p, m, kappa), m, p)

    def sigma2_dstar(self, alpha: float, p: float, m: int, kappa: int) -> float:
        alpha = round(float(alpha), 4)
        lam = self.lambda_star_matrix(alpha, p, m, kappa)
        return sigma2_dstar(lam, sigma2_matrix(alpha, p, m, kappa), m, p)

    def provenance(self, kind: str, alpha: float, p: float, m: int, kappa: int | None = None) -> dict:
        out = {
            "kind": kind,
            "evaluated_at_alpha": round(float(alpha), 4),
            "p": p,
            "m": m,
            "n_inner": self.n_inner,
            "B": self.B,
            "master_seed": self.master_seed,
        }
        if kappa is not None:
            out["kappa"] = kappa
        return out
