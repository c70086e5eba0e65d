"""Benchmark the variogram kernels: numba backend vs pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
The numpy path is also selectable package-wide via FRACIDX_NUMBA=0.
"""

import time

import numpy as np

from fracidx.kernels import (
    HAVE_NUMBA,
    _vario_lags_batch_numpy,
    _vario_lags_numpy,
    backend_name,
)

if HAVE_NUMBA:
    from fracidx.kernels import _vario_lags_batch_numba, _vario_lags_numba


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm up (and JIT-compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    print(f"active backend: {backend_name()}")
    print(f"{'case':<38}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    cases = [
        ("single path n=1e4, lags 1..5, p=2", rng.standard_normal(10_000), np.arange(1, 6), 2.0),
        ("single path n=1e4, 10 lags, p=1.5", rng.standard_normal(10_000),
         np.array([1, 2, 3, 4, 5, 10, 20, 30, 40, 50]), 1.5),
        ("batch 2000x1600, 10 lags, p=2", rng.standard_normal((2000, 1600)),
         np.array([1, 2, 3, 4, 5, 10, 20, 30, 40, 50]), 2.0),
        ("batch 256x10000, lags 1..5, p=1", rng.standard_normal((256, 10_000)),
         np.arange(1, 6), 1.0),
    ]
    for label, data, lags, p in cases:
        lags = lags.astype(np.int64)
        if data.ndim == 1:
            t_np = timeit(_vario_lags_numpy, data, lags, p)
            t_nb = timeit(_vario_lags_numba, data, lags, p) if HAVE_NUMBA else float("nan")
        else:
            t_np = timeit(_vario_lags_batch_numpy, data, lags, p)
            t_nb = timeit(_vario_lags_batch_numba, data, lags, p) if HAVE_NUMBA else float("nan")
        speedup = t_np / t_nb if HAVE_NUMBA else float("nan")
        print(f"{label:<38}{t_np * 1e3:>10.2f}ms{t_nb * 1e3:>10.2f}ms{speedup:>9.1f}x")
    if not HAVE_NUMBA:
        print("numba unavailable or disabled; numpy timings only")


if __name__ == "__main__":
    main()
