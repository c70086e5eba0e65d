"""Hot numeric kernels: power-variogram sums over lag sets.

Two interchangeable backends are provided: numba ``@njit`` loops (default
when numba is importable) and pure-numpy slicing.  Set ``FRACIDX_NUMBA=0``
in the environment to force the numpy path; ``benchmarks/bench_kernels.py``
compares the two.

Both backends implement

    value[k] = (n - k)^-1 * sum_i |x[i + k] - x[i]|^p

for each lag k.  The batch variants apply the same reduction row-wise to a
2-D array of paths; they are what the Monte Carlo engines call in their
inner loop.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = os.environ.get("FRACIDX_NUMBA", "1").strip().lower()
_WANT_NUMBA = _ENV_FLAG not in ("0", "false", "off", "no")

try:  # pragma: no cover - exercised indirectly via backend selection
    if not _WANT_NUMBA:
        raise ImportError("numba disabled via FRACIDX_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    njit = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _vario_lags_numpy(x: np.ndarray, lags: np.ndarray, p: float) -> np.ndarray:
    out = np.empty(len(lags))
    for j, k in enumerate(lags):
        d = x[k:] - x[:-k]
        if p == 2.0:
            out[j] = np.mean(d * d)
        elif p == 1.0:
            out[j] = np.mean(np.abs(d))
        else:
            out[j] = np.mean(np.abs(d) ** p)
    return out


def _vario_lags_batch_numpy(paths: np.ndarray, lags: np.ndarray, p: float) -> np.ndarray:
    out = np.empty((paths.shape[0], len(lags)))
    for j, k in enumerate(lags):
        d = paths[:, k:] - paths[:, :-k]
        if p == 2.0:
            out[:, j] = np.mean(d * d, axis=1)
        elif p == 1.0:
            out[:, j] = np.mean(np.abs(d), axis=1)
        else:
            out[:, j] = np.mean(np.abs(d) ** p, axis=1)
    return out


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _vario_lags_numba(x, lags, p):  # pragma: no cover - compiled
        out = np.empty(len(lags))
        n = len(x)
        for j in range(len(lags)):
            k = lags[j]
            acc = 0.0
            if p == 2.0:
                for i in range(n - k):
                    d = x[i + k] - x[i]
                    acc += d * d
            elif p == 1.0:
                for i in range(n - k):
                    acc += abs(x[i + k] - x[i])
            else:
                for i in range(n - k):
                    acc += abs(x[i + k] - x[i]) ** p
            out[j] = acc / (n - k)
        return out

    @njit(cache=True)
    def _vario_lags_batch_numba(paths, lags, p):  # pragma: no cover - compiled
        nb, n = paths.shape
        out = np.empty((nb, len(lags)))
        for b in range(nb):
            for j in range(len(lags)):
                k = lags[j]
                acc = 0.0
                if p == 2.0:
                    for i in range(n - k):
                        d = paths[b, i + k] - paths[b, i]
                        acc += d * d
                elif p == 1.0:
                    for i in range(n - k):
                        acc += abs(paths[b, i + k] - paths[b, i])
                else:
                    for i in range(n - k):
                        acc += abs(paths[b, i + k] - paths[b, i]) ** p
                out[b, j] = acc / (n - k)
        return out


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------

USING_NUMBA = HAVE_NUMBA


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"


def variogram_lags(x: np.ndarray, lags, p: float) -> np.ndarray:
    """Mean p-th power increment sums of one path at each lag."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size and (lags.min() < 1 or lags.max() >= x.shape[0]):
        raise ValueError("lags must satisfy 1 <= k <= n-1")
    if USING_NUMBA:
        return _vario_lags_numba(x, lags, float(p))
    return _vario_lags_numpy(x, lags, float(p))


def variogram_lags_batch(paths: np.ndarray, lags, p: float) -> np.ndarray:
    """Row-wise variogram values for a (B, n) array of paths."""
    paths = np.ascontiguousarray(paths, dtype=np.float64)
    lags = np.asarray(lags, dtype=np.int64)
    if lags.size and (lags.min() < 1 or lags.max() >= paths.shape[1]):
        raise ValueError("lags must satisfy 1 <= k <= n-1")
    if USING_NUMBA:
        return _vario_lags_batch_numba(paths, lags, float(p))
    return _vario_lags_batch_numpy(paths, lags, float(p))
