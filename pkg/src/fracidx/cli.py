"""Command-line interface.

Subcommands: simulate, estimate, test, study, ingest.  Series files are one
value per line with '#' header comments; single results are JSON, study
reports are CSV.  A key=value config file can predefine any long flag
(--config file); explicit flags win.  Exit codes: 0 success, 2 validation,
3 numerical degeneracy, 4 I/O.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .asymvar import VarianceEngine
from .errors import (
    DegenerateStatisticError,
    EmbeddingError,
    FracidxError,
    ValidationError,
)
from .estimate import EstimatorConfig, estimate_alpha, estimate_alpha_robust
from .infer import confidence_interval, noise_test, standard_error, test_alpha, test_alpha_robust
from .models import (
    FBM,
    ConstantVol,
    GaussianModel,
    NoiseSpec,
    Path,
    SmoothOUVol,
    TwoRegimeVol,
    normalize_kind,
)
from .series_io import dump_json, read_column, read_series, write_json_result, write_series
from .simulate import add_noise, simulate_fbm, simulate_gamma_bss, simulate_stationary_gaussian
from .studies import STUDIES, StudySpec, run_study

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _parse_vol(text: str):
    kind, _, rest = text.partition(":")
    params = [float(v) for v in rest.split(",")] if rest else []
    kind = kind.strip().lower()
    if kind == "constant":
        return ConstantVol(*params) if params else ConstantVol()
    if kind == "tworegime":
        return TwoRegimeVol(*params) if params else TwoRegimeVol()
    if kind == "smoothou":
        return SmoothOUVol(*params) if params else SmoothOUVol()
    raise ValidationError(
        f"unknown volatility spec {text!r}; use constant:LEVEL, "
        "tworegime:LEVEL1,LEVEL2,SWITCH or smoothou:MEAN,RATE,VOL[,XI[,WINDOW]]"
    )


def _read_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            key, sep, value = stripped.partition("=")
            if not sep:
                raise ValidationError(f"config line {lineno} is not key=value: {stripped!r}")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in str(text).split(","))


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in str(text).split(","))


def _strings(text: str) -> tuple:
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _add_mc_flags(sub):
    sub.add_argument("--mc-n-inner", type=int, default=10_000,
                     help="inner sample size for the variance Monte Carlo")
    sub.add_argument("--mc-b", type=int, default=10_000,
                     help="replications for the variance Monte Carlo")
    sub.add_argument("--mc-seed", type=int, default=1833,
                     help="master seed of the variance Monte Carlo")
    sub.add_argument("--cache-dir", default=None,
                     help="matrix cache directory (default: $FRACIDX_CACHE_DIR)")
    sub.add_argument("--workers", type=int, default=1)


def _engine(args) -> VarianceEngine:
    return VarianceEngine(
        n_inner=args.mc_n_inner, B=args.mc_b, master_seed=args.mc_seed,
        cache_dir=args.cache_dir, workers=args.workers,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracidx",
        description="Fractal (roughness) index estimation and inference.",
    )
    parser.add_argument("--version", action="version", version=f"fracidx {__version__}")
    parser.add_argument("--config", default=None,
                        help="key=value file predefining long flags (flags win)")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate a path and write it as CSV")
    sim.add_argument("--model", required=True,
                     help="fbm | matern | powexp | cauchy | dagum | bss")
    sim.add_argument("--alpha", type=float, required=True)
    sim.add_argument("--beta", type=float, default=1.0)
    sim.add_argument("--tau", type=float, default=None)
    sim.add_argument("--bss-lambda", type=float, default=1.0, dest="bss_lambda")
    sim.add_argument("--vol", default="constant:1.0",
                     help="volatility for --model bss, e.g. tworegime:1,2,0.5")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--noise-mu", type=float, default=0.0)
    sim.add_argument("--noise-var", type=float, default=0.0)
    sim.add_argument("--out", required=True)

    est = sub.add_parser("estimate", help="estimate the fractal index from a series file")
    est.add_argument("--in", dest="infile", required=True)
    est.add_argument("--p", type=float, default=2.0)
    est.add_argument("--m", type=int, default=5)
    est.add_argument("--robust", action="store_true")
    est.add_argument("--kappa", type=int, default=10)
    est.add_argument("--level", type=float, default=0.05,
                     help="miscoverage of the reported confidence interval")
    est.add_argument("--out", default=None, help="JSON output (default: stdout)")
    _add_mc_flags(est)

    tst = sub.add_parser("test", help="hypothesis tests on a series file")
    tst.add_argument("--in", dest="infile", required=True)
    group = tst.add_mutually_exclusive_group(required=True)
    group.add_argument("--null", type=float, default=None,
                       help="test 'index = NULL' (two-sided)")
    group.add_argument("--noise", action="store_true",
                       help="test for additive observation noise (upper tail)")
    tst.add_argument("--robust", action="store_true",
                     help="use the noise-robust estimator for --null tests")
    tst.add_argument("--p", type=float, default=2.0)
    tst.add_argument("--m", type=int, default=5)
    tst.add_argument("--kappa", type=int, default=10)
    tst.add_argument("--level", type=float, default=0.05)
    tst.add_argument("--out", default=None, help="JSON output (default: stdout)")
    _add_mc_flags(tst)

    stu = sub.add_parser("study", help="run a simulation study over a grid")
    stu.add_argument("--study", required=True, choices=STUDIES)
    stu.add_argument("--alphas", type=_floats, default=(-0.4, -0.2, 0.0, 0.2))
    stu.add_argument("--ns", type=_ints, default=(1000,))
    stu.add_argument("--ps", type=_floats, default=(2.0,))
    stu.add_argument("--ms", type=_ints, default=(5,))
    stu.add_argument("--kappas", type=_ints, default=(10,))
    stu.add_argument("--noise-vars", type=_floats, default=(0.0,))
    stu.add_argument("--noise-mu", type=float, default=1.0)
    stu.add_argument("--models", type=_strings,
                     default=("fbm", "matern", "powexp", "cauchy", "dagum"))
    stu.add_argument("--b", type=int, default=2000, help="replications per cell")
    stu.add_argument("--level", type=float, default=0.05)
    stu.add_argument("--seed", type=int, default=7011)
    stu.add_argument("--mc-n-inner", type=int, default=None)
    stu.add_argument("--mc-b", type=int, default=10_000)
    stu.add_argument("--workers", type=int, default=1)
    stu.add_argument("--out", required=True, help="CSV report (resumable by cell)")

    ing = sub.add_parser("ingest", help="normalize an external CSV column into a series file")
    ing.add_argument("--in", dest="infile", required=True)
    ing.add_argument("--column", default="0",
                     help="column index or header name (default 0)")
    ing.add_argument("--demean", action="store_true")
    ing.add_argument("--standardize", action="store_true",
                     help="demean and scale to unit variance")
    ing.add_argument("--subsample", type=int, default=1,
                     help="keep every S-th observation (applied after standardization)")
    ing.add_argument("--out", required=True)

    return parser


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------

def _cmd_simulate(args) -> int:
    model_name = args.model.strip().lower()
    if model_name == "bss":
        path = simulate_gamma_bss(args.alpha, args.bss_lambda, _parse_vol(args.vol),
                                  args.n, args.seed)
    else:
        kind = normalize_kind(model_name)
        if kind == FBM:
            path = simulate_fbm(args.n, args.alpha, args.seed)
        else:
            model = GaussianModel(kind, args.alpha, args.beta, args.tau)
            model.warn_if_outside_clt_range()
            path = simulate_stationary_gaussian(model, args.n, args.seed)
    if args.noise_mu != 0.0 or args.noise_var > 0.0:
        path = add_noise(path, NoiseSpec(args.noise_mu, args.noise_var), args.seed)
    write_series(args.out, path.values, header=path.annotations)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    values, _ = read_series(args.infile)
    config = EstimatorConfig(p=args.p, m=args.m, kappa=args.kappa)
    path = Path(values)
    est = estimate_alpha_robust(path, config) if args.robust else estimate_alpha(path, config)
    engine = _engine(args)
    payload = {
        "alpha_hat": est.alpha_hat,
        "slope": est.slope,
        "s_p_hat": est.s_p_hat,
        "n": est.n,
        "robust": est.robust,
        "config": {"p": config.p, "m": config.m, "kappa": config.kappa if est.robust else None},
        "clt_regime": "valid" if est.clt_regime_valid else "invalid",
    }
    if est.clt_regime_valid:
        lo, hi = confidence_interval(est, engine, level=args.level)
        payload["std_error"] = standard_error(est, engine)
        payload["ci"] = [lo, hi]
        payload["ci_level"] = 1.0 - args.level
        payload["variance_source"] = engine.provenance(
            "lambda-star" if est.robust else "lambda", est.alpha_hat,
            config.p, config.m, config.kappa if est.robust else None,
        )
    else:
        payload["std_error"] = None
        payload["ci"] = None
    if args.out:
        write_json_result(args.out, payload)
    else:
        print(dump_json(payload))
    return EXIT_OK


def _cmd_test(args) -> int:
    values, _ = read_series(args.infile)
    config = EstimatorConfig(p=args.p, m=args.m, kappa=args.kappa)
    path = Path(values)
    engine = _engine(args)
    if args.noise:
        result = noise_test(path, config, engine, level=args.level)
    elif args.robust:
        result = test_alpha_robust(path, args.null, config, engine, level=args.level)
    else:
        result = test_alpha(path, args.null, config, engine, level=args.level)
    payload = result.to_dict()
    payload["config"] = {"p": config.p, "m": config.m, "kappa": config.kappa}
    payload["n"] = path.n
    if args.out:
        write_json_result(args.out, payload)
    else:
        print(dump_json(payload))
    return EXIT_OK


def _cmd_study(args) -> int:
    spec = StudySpec(
        study=args.study, B=args.b, master_seed=args.seed, out=args.out,
        level=args.level, alphas=args.alphas, ns=args.ns, ps=args.ps,
        ms=args.ms, kappas=args.kappas, noise_vars=args.noise_vars,
        noise_mu=args.noise_mu, models=args.models,
        mc_n_inner=args.mc_n_inner, mc_B=args.mc_b, workers=args.workers,
    )
    run_study(spec)
    return EXIT_OK


def _cmd_ingest(args) -> int:
    column = int(args.column) if str(args.column).lstrip("-").isdigit() else args.column
    values = read_column(args.infile, column=column)
    header = {"source": args.infile, "column": args.column, "rows_in": len(values)}
    if args.standardize:
        mean = values.mean()
        sd = values.std()
        if sd == 0:
            raise DegenerateStatisticError("cannot standardize a constant column")
        values = (values - mean) / sd
        header["demeaned"] = mean
        header["scaled_by"] = sd
    elif args.demean:
        mean = values.mean()
        values = values - mean
        header["demeaned"] = mean
    if args.subsample > 1:
        values = values[:: args.subsample]
        header["subsample_stride"] = args.subsample
    header["rows_out"] = len(values)
    write_series(args.out, values, header=header)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "test": _cmd_test,
    "study": _cmd_study,
    "ingest": _cmd_ingest,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    # config file provides defaults; explicit flags take precedence
    if "--config" in argv:
        config_path = argv[argv.index("--config") + 1]
        try:
            defaults = _read_config(config_path)
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_IO
        except ValidationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        converters = {
            "alphas": _floats, "ns": _ints, "ps": _floats, "ms": _ints,
            "kappas": _ints, "noise_vars": _floats, "models": _strings,
        }
        parsed = {k: converters.get(k, str)(v) for k, v in defaults.items()}
        for action in parser._subparsers._group_actions[0].choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(**{k: v for k, v in parsed.items() if k in known})
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DegenerateStatisticError, EmbeddingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FracidxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
