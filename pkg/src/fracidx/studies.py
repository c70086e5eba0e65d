"""Simulation-study runner: bandwidth effects, robust-kappa tuning, and the
size/power tables for the three hypothesis tests.

Studies execute over a parameter grid, one cell at a time, with
per-(cell, replication) substreams so a run is deterministic for a given
master seed, resumable by cell, and independent of any batching or worker
configuration.  Every reported number carries a Monte Carlo standard error
(rates: binomial; means: sd/sqrt(B); variance-like quantities: the
chi-square approximation value*sqrt(2/(B-1))).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .asymvar import VarianceEngine
from .errors import ValidationError
from .estimate import CLT_ALPHA_MAX, design_vector
from .kernels import variogram_lags_batch
from .models import GaussianModel
from .seeding import child_sequence, substream
from .series_io import SCHEMA_VERSION, ReportWriter
from .simulate import fbm_batch, stationary_batch
from .variogram import moment_constant

STUDIES = (
    "bandwidth-variance",
    "bandwidth-bias-mse",
    "robust-kappa",
    "size-power-clt",
    "size-power-robust",
    "size-power-noise",
)

DEFAULT_MODELS = ("fbm", "matern", "powexp", "cauchy", "dagum")


@dataclass
class StudySpec:
    study: str
    B: int = 2000
    master_seed: int = 7011
    out: str | None = None
    level: float = 0.05
    alphas: tuple = (-0.4, -0.2, 0.0, 0.2)
    ns: tuple = (1000,)
    ps: tuple = (2.0,)
    ms: tuple = (5,)
    kappas: tuple = (10,)
    noise_vars: tuple = (0.0,)
    noise_mu: float = 1.0
    models: tuple = DEFAULT_MODELS
    mc_n_inner: int | None = None  # None: n_inner follows the cell's n where sensible
    mc_B: int = 10_000
    workers: int = 1
    chunk: int = 256

    def __post_init__(self):
        if self.study not in STUDIES:
            raise ValidationError(f"unknown study {self.study!r}; expected one of {STUDIES}")
        if self.B < 1:
            raise ValidationError("need at least one replication")
        for name in ("alphas", "ns", "ps", "ms", "kappas", "noise_vars", "models"):
            if not tuple(getattr(self, name)):
                raise ValidationError(f"grid {name} must be non-empty")


# ---------------------------------------------------------------------------
# batched estimator helpers (shared with the test-suite)
# ---------------------------------------------------------------------------

def batch_plain_alpha(paths: np.ndarray, p: float, m: int) -> np.ndarray:
    x = design_vector(m)
    g = variogram_lags_batch(paths, np.arange(1, m + 1), p)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (np.log(g) @ x) / (x @ x) / p - 0.5
    out[np.any(g <= 0, axis=1)] = np.nan
    return out


def batch_robust_alpha(paths: np.ndarray, p: float, m: int, kappa: int) -> np.ndarray:
    x = design_vector(m)
    lags = np.arange(1, m + 1)
    base = variogram_lags_batch(paths, lags, p)
    scaled = variogram_lags_batch(paths, kappa * lags, p)
    gaps = scaled ** (2.0 / p) - base ** (2.0 / p)
    ok = np.all(gaps > 0, axis=1)
    out = np.full(paths.shape[0], np.nan)
    if ok.any():
        out[ok] = (np.log(gaps[ok]) @ x) / (x @ x) / 2.0 - 0.5
    return out


def batch_sp(paths: np.ndarray, p: float) -> np.ndarray:
    g1 = variogram_lags_batch(paths, [1], p)[:, 0]
    g2 = variogram_lags_batch(paths, [1], 2.0 * p)[:, 0]
    return np.sqrt(g2 / moment_constant(2.0 * p)) / (g1 / moment_constant(p))


def _study_model(kind: str, alpha: float) -> GaussianModel | None:
    """Study parametrization of the named model at a given index.

    Scale beta = 1 and shape parameters chosen inside the documented ranges
    (Dagum needs alpha < tau, so its tau tracks alpha).
    """
    if kind == "fbm":
        return None
    if kind == "cauchy":
        return GaussianModel("cauchy", alpha, 1.0, 1.0)
    if kind == "dagum":
        tau = 0.0 if alpha < 0.0 else 0.45
        return GaussianModel("dagum", alpha, 1.0, tau)
    return GaussianModel(kind, alpha)


def _paths_for(kind: str, alpha: float, n: int, sequences) -> np.ndarray:
    model = _study_model(kind, alpha)
    if model is None:
        return fbm_batch(alpha, n, sequences)
    return stationary_batch(model, n, sequences)


def _iter_chunks(spec: StudySpec, cell_index: int, n: int, kind: str, alpha: float):
    """Yield (paths, rep_offset) chunks of B replications for one cell."""
    n_pairs = (spec.B + 1) // 2
    pair_chunk = max(1, spec.chunk // 2)
    for lo in range(0, n_pairs, pair_chunk):
        hi = min(lo + pair_chunk, n_pairs)
        seqs = [child_sequence(spec.master_seed, f"study:{spec.study}", cell_index, j)
                for j in range(lo, hi)]
        paths = _paths_for(kind, alpha, n, seqs)
        if hi == n_pairs and spec.B % 2 == 1:
            paths = paths[:-1]
        yield paths, 2 * lo


def _add_noise_batch(spec: StudySpec, cell_index: int, paths: np.ndarray,
                     rep_offset: int, noise_var: float) -> np.ndarray:
    if noise_var == 0.0:
        return paths + spec.noise_mu
    out = np.empty_like(paths)
    sd = math.sqrt(noise_var)
    for i in range(paths.shape[0]):
        rng = substream(spec.master_seed, f"study-noise:{spec.study}",
                        cell_index, rep_offset + i)
        out[i] = paths[i] + spec.noise_mu + sd * rng.standard_normal(paths.shape[1])
    return out


def _rate_se(rate: float, count: int) -> float:
    return math.sqrt(max(rate * (1.0 - rate), 1e-12) / count)


# ---------------------------------------------------------------------------
# individual studies
# ---------------------------------------------------------------------------

def _run_bandwidth_variance(spec: StudySpec, writer: ReportWriter) -> None:
    cell_index = -1
    for alpha in spec.alphas:
        for p in spec.ps:
            for n in spec.ns:
                cell_index += 1
                key = f"alpha={alpha}|p={p:g}|n={n}"
                if all(writer.done(f"{key}|m={m}") for m in spec.ms):
                    continue
                engine = VarianceEngine(
                    n_inner=spec.mc_n_inner or n, B=spec.B,
                    master_seed=spec.master_seed, workers=spec.workers,
                    chunk=spec.chunk,
                )
                m_max = max(spec.ms)
                lam = engine.lambda_matrix(alpha, p, m_max)
                for m in spec.ms:
                    sub = lam.entries[:m, :m]
                    x = design_vector(m)
                    xx = float(x @ x)
                    sigma2_n = float(x @ sub @ x) / (xx * xx * p * p) / engine.n_inner
                    writer.add({
                        "cell": f"{key}|m={m}",
                        "alpha": alpha, "p": p, "n": n, "m": m,
                        "sigma2_finite": f"{sigma2_n:.8e}",
                        "sigma2_finite_se": f"{sigma2_n * math.sqrt(2.0 / (spec.B - 1)):.2e}",
                        "B": spec.B,
                    })


def _run_bandwidth_bias_mse(spec: StudySpec, writer: ReportWriter) -> None:
    m_list = sorted(spec.ms)
    cell_index = -1
    for kind in spec.models:
        for alpha in spec.alphas:
            for p in spec.ps:
                for n in spec.ns:
                    cell_index += 1
                    key = f"model={kind}|alpha={alpha}|p={p:g}|n={n}"
                    if all(writer.done(f"{key}|m={m}") for m in m_list):
                        continue
                    errs = {m: [] for m in m_list}
                    for paths, _ in _iter_chunks(spec, cell_index, n, kind, alpha):
                        for m in m_list:
                            errs[m].append(batch_plain_alpha(paths, p, m) - alpha)
                    for m in m_list:
                        e = np.concatenate(errs[m])
                        e = e[~np.isnan(e)]
                        bias = float(e.mean())
                        mse = float((e**2).mean())
                        writer.add({
                            "cell": f"{key}|m={m}",
                            "model": kind, "alpha": alpha, "p": p, "n": n, "m": m,
                            "bias": f"{bias:.6e}",
                            "bias_se": f"{e.std(ddof=1) / math.sqrt(len(e)):.2e}",
                            "mse": f"{mse:.6e}",
                            "mse_se": f"{(e**2).std(ddof=1) / math.sqrt(len(e)):.2e}",
                            "B": len(e),
                        })


def _run_robust_kappa(spec: StudySpec, writer: ReportWriter) -> None:
    cell_index = -1
    for alpha in spec.alphas:
        for p in spec.ps:
            for n in spec.ns:
                for m in spec.ms:
                    for noise_var in spec.noise_vars:
                        cell_index += 1
                        key = f"alpha={alpha}|p={p:g}|n={n}|m={m}|sigma_u2={noise_var:g}"
                        if all(writer.done(f"{key}|kappa={k}") for k in (0, *spec.kappas)):
                            continue
                        plain_err = []
                        robust_err = {k: [] for k in spec.kappas}
                        for paths, off in _iter_chunks(spec, cell_index, n, "fbm", alpha):
                            z = _add_noise_batch(spec, cell_index, paths, off, noise_var)
                            plain_err.append(batch_plain_alpha(z, p, m) - alpha)
                            for kappa in spec.kappas:
                                robust_err[kappa].append(
                                    batch_robust_alpha(z, p, m, kappa) - alpha
                                )
                        rows = [(0, np.concatenate(plain_err))]
                        rows += [(k, np.concatenate(robust_err[k])) for k in spec.kappas]
                        for kappa, e in rows:
                            valid = e[~np.isnan(e)]
                            bias = float(valid.mean())
                            rmse = float(np.sqrt((valid**2).mean()))
                            writer.add({
                                "cell": f"{key}|kappa={kappa}",
                                "alpha": alpha, "p": p, "n": n, "m": m,
                                "sigma_u2": noise_var,
                                "kappa": kappa,  # 0 marks the plain estimator
                                "bias": f"{bias:.6e}",
                                "bias_se": f"{valid.std(ddof=1) / math.sqrt(len(valid)):.2e}",
                                "rmse": f"{rmse:.6e}",
                                "rmse_se": f"{(valid**2).std(ddof=1) / math.sqrt(len(valid)) / (2 * rmse):.2e}",
                                "B": len(valid),
                                "failed": int(np.isnan(e).sum()),
                            })


def _size_power_cells(spec: StudySpec, robust: bool):
    rate = -0.5 if robust else -0.25
    for alpha in spec.alphas:
        for p in spec.ps:
            for n in spec.ns:
                yield alpha, p, n, "size", alpha
                yield alpha, p, n, "power", alpha + float(n) ** rate


def _run_size_power(spec: StudySpec, writer: ReportWriter, robust: bool) -> None:
    m = spec.ms[0]
    kappa = spec.kappas[0]
    engine = VarianceEngine(
        n_inner=spec.mc_n_inner or 10_000, B=spec.mc_B,
        master_seed=spec.master_seed, workers=spec.workers, chunk=spec.chunk,
    )
    z_crit = float(norm.ppf(1.0 - spec.level / 2.0))
    cell_index = -1
    for alpha, p, n, panel, null in _size_power_cells(spec, robust):
        cell_index += 1
        key = f"alpha={alpha}|p={p:g}|n={n}|panel={panel}"
        if writer.done(key):
            continue
        row = {
            "cell": key, "alpha": alpha, "p": p, "n": n, "panel": panel,
            "null_alpha": f"{null:.6g}", "m": m, "kappa": kappa if robust else "",
            "level": spec.level, "B": spec.B,
        }
        if not -0.5 < null < CLT_ALPHA_MAX:
            row.update({"rejection_rate": "", "rejection_se": "",
                        "skipped": "null outside CLT regime"})
            writer.add(row)
            continue
        if robust:
            sigma2 = engine.sigma2_star(null, p, m, kappa)
        else:
            sigma2 = engine.sigma2(null, p, m)
        rej = 0
        total = 0
        failed = 0
        for paths, _ in _iter_chunks(spec, cell_index, n, "fbm", alpha):
            if robust:
                ah = batch_robust_alpha(paths, p, m, kappa)
            else:
                ah = batch_plain_alpha(paths, p, m)
            sp = batch_sp(paths, p)
            stat = math.sqrt(n) * (ah - null) / (sp * math.sqrt(sigma2))
            valid = ~np.isnan(stat)
            rej += int((np.abs(stat[valid]) > z_crit).sum())
            total += int(valid.sum())
            failed += int((~valid).sum())
        rate = rej / total if total else float("nan")
        row.update({
            "rejection_rate": f"{rate:.4f}",
            "rejection_se": f"{_rate_se(rate, total):.4f}",
            "failed": failed,
            "skipped": "",
        })
        writer.add(row)


def _run_size_power_noise(spec: StudySpec, writer: ReportWriter) -> None:
    m = spec.ms[0]
    kappa = spec.kappas[0]
    z_crit = float(norm.ppf(1.0 - spec.level))  # one-sided upper tail
    cell_index = -1
    for alpha in spec.alphas:
        for p in spec.ps:
            for n in spec.ns:
                for noise_var in spec.noise_vars:
                    cell_index += 1
                    key = f"alpha={alpha}|p={p:g}|n={n}|sigma_u2={noise_var:g}"
                    if writer.done(key):
                        continue
                    engine = VarianceEngine(
                        n_inner=spec.mc_n_inner or n, B=spec.mc_B,
                        master_seed=spec.master_seed, use_disk_cache=False,
                        workers=spec.workers, chunk=spec.chunk,
                    )
                    rej = 0
                    total = 0
                    failed = 0
                    for paths, off in _iter_chunks(spec, cell_index, n, "fbm", alpha):
                        z = _add_noise_batch(spec, cell_index, paths, off, noise_var)
                        ah = batch_plain_alpha(z, p, m)
                        ar = batch_robust_alpha(z, p, m, kappa)
                        sp = batch_sp(z, p)
                        for i in range(z.shape[0]):
                            if np.isnan(ah[i]) or np.isnan(ar[i]) or not -0.5 < ar[i] < 0.5:
                                failed += 1
                                continue
                            sigma2 = engine.sigma2_dstar(ar[i], p, m, kappa)
                            stat = math.sqrt(n) * (ar[i] - ah[i]) / (sp[i] * math.sqrt(sigma2))
                            rej += int(stat > z_crit)
                            total += 1
                    rate = rej / total if total else float("nan")
                    writer.add({
                        "cell": key, "alpha": alpha, "p": p, "n": n,
                        "sigma_u2": noise_var, "m": m, "kappa": kappa,
                        "panel": "size" if noise_var == 0.0 else "power",
                        "level": spec.level, "B": spec.B,
                        "rejection_rate": f"{rate:.4f}",
                        "rejection_se": f"{_rate_se(rate, total):.4f}",
                        "failed": failed,
                        "mc_B_inner": spec.mc_B,
                        "mc_n_inner": spec.mc_n_inner or n,
                    })


_COLUMNS = {
    "bandwidth-variance": ["cell", "alpha", "p", "n", "m",
                           "sigma2_finite", "sigma2_finite_se", "B"],
    "bandwidth-bias-mse": ["cell", "model", "alpha", "p", "n", "m",
                           "bias", "bias_se", "mse", "mse_se", "B"],
    "robust-kappa": ["cell", "alpha", "p", "n", "m", "sigma_u2", "kappa",
                     "bias", "bias_se", "rmse", "rmse_se", "B", "failed"],
    "size-power-clt": ["cell", "alpha", "p", "n", "panel", "null_alpha", "m",
                       "kappa", "level", "B", "rejection_rate", "rejection_se",
                       "failed", "skipped"],
    "size-power-robust": ["cell", "alpha", "p", "n", "panel", "null_alpha", "m",
                          "kappa", "level", "B", "rejection_rate", "rejection_se",
                          "failed", "skipped"],
    "size-power-noise": ["cell", "alpha", "p", "n", "sigma_u2", "m", "kappa",
                         "panel", "level", "B", "rejection_rate", "rejection_se",
                         "failed", "mc_B_inner", "mc_n_inner"],
}


def run_study(spec: StudySpec) -> ReportWriter:
    """Execute a study, writing (and resuming) its CSV report if requested."""
    started = time.time()
    header = {
        "schema_version": SCHEMA_VERSION,
        "study": spec.study,
        "master_seed": spec.master_seed,
        "B": spec.B,
        "level": spec.level,
        "alphas": list(spec.alphas),
        "ns": list(spec.ns),
        "ps": list(spec.ps),
        "ms": list(spec.ms),
        "kappas": list(spec.kappas),
        "noise_vars": list(spec.noise_vars),
        "noise_mu": spec.noise_mu,
        "models": list(spec.models),
        "mc_n_inner": spec.mc_n_inner,
        "mc_B": spec.mc_B,
    }
    writer = ReportWriter(spec.out, header, _COLUMNS[spec.study])
    if spec.study == "bandwidth-variance":
        _run_bandwidth_variance(spec, writer)
    elif spec.study == "bandwidth-bias-mse":
        _run_bandwidth_bias_mse(spec, writer)
    elif spec.study == "robust-kappa":
        _run_robust_kappa(spec, writer)
    elif spec.study == "size-power-clt":
        _run_size_power(spec, writer, robust=False)
    elif spec.study == "size-power-robust":
        _run_size_power(spec, writer, robust=True)
    else:
        _run_size_power_noise(spec, writer)
    writer.header["elapsed_seconds"] = f"{time.time() - started:.1f}"
    if spec.out:
        writer._flush()
    return writer
