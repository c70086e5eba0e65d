"""Feasible hypothesis tests and confidence intervals for the fractal index.

All statistics are studentized by the heteroskedasticity factor estimate and
a Monte Carlo variance from the engine:

  * index test:        sqrt(n) (a_hat - a0) / (S_p * sigma_{m,p}(a0)),
                       two-sided against N(0,1), variance at the null a0;
  * robust index test: same with the robust estimate and its variance;
  * noise test:        sqrt(n) (a_hat_robust - a_hat) / (S_p * sigma**(a_hat_robust)),
                       one-sided upper tail, since contamination drives the
                       statistic to +infinity (there is no null index value,
                       so the variance is evaluated at the robust estimate);
  * confidence interval: variance evaluated at the point estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.stats import norm

from .errors import CLTRegimeError
from .estimate import (
    CLT_ALPHA_MAX,
    EstimatorConfig,
    FractalEstimate,
    estimate_alpha,
    estimate_alpha_robust,
)
from .asymvar import VarianceEngine


@dataclass
class TestResult:
    statistic: float
    p_value: float
    reject: bool
    null_spec: str
    level: float
    variance_used: float
    variance_source: dict

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "reject": self.reject,
            "null_spec": self.null_spec,
            "level": self.level,
            "variance_used": self.variance_used,
            "variance_source": self.variance_source,
        }


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise CLTRegimeError(f"significance level must lie in (0, 1), got {level}")


def _check_null_regime(alpha0: float) -> None:
    if not -0.5 < alpha0 < CLT_ALPHA_MAX:
        raise CLTRegimeError(
            f"null value alpha0={alpha0} is outside (-1/2, 1/4) where the "
            "sqrt(n) normal limit applies"
        )


def alpha_test_statistic(
    alpha_hat: float, alpha0: float, n: int, s_p: float, sigma2: float
) -> float:
    """Studentized deviation sqrt(n) (a_hat - a0) / (S_p sqrt(sigma2))."""
    return math.sqrt(n) * (alpha_hat - alpha0) / (s_p * math.sqrt(sigma2))


def _two_sided(statistic: float) -> float:
    return 2.0 * float(norm.sf(abs(statistic)))


def test_alpha(
    path,
    alpha0: float,
    config: EstimatorConfig | None = None,
    engine: VarianceEngine | None = None,
    level: float = 0.05,
) -> TestResult:
    """Two-sided test of the null 'the fractal index equals alpha0'."""
    _check_level(level)
    _check_null_regime(alpha0)
    config = config or EstimatorConfig()
    engine = engine or VarianceEngine()
    est = estimate_alpha(path, config)
    sigma2 = engine.sigma2(alpha0, config.p, config.m)
    stat = alpha_test_statistic(est.alpha_hat, alpha0, est.n, est.s_p_hat, sigma2)
    p_value = _two_sided(stat)
    return TestResult(
        statistic=stat,
        p_value=p_value,
        reject=p_value < level,
        null_spec=f"alpha = {alpha0}",
        level=level,
        variance_used=sigma2,
        variance_source=engine.provenance("lambda", alpha0, config.p, config.m),
    )


def test_alpha_robust(
    path,
    alpha0: float,
    config: EstimatorConfig | None = None,
    engine: VarianceEngine | None = None,
    level: float = 0.05,
) -> TestResult:
    """Two-sided test of 'index = alpha0' using the noise-robust estimator."""
    _check_level(level)
    _check_null_regime(alpha0)
    config = config or EstimatorConfig()
    engine = engine or VarianceEngine()
    est = estimate_alpha_robust(path, config)
    sigma2 = engine.sigma2_star(alpha0, config.p, config.m, config.kappa)
    stat = alpha_test_statistic(est.alpha_hat, alpha0, est.n, est.s_p_hat, sigma2)
    p_value = _two_sided(stat)
    return TestResult(
        statistic=stat,
        p_value=p_value,
        reject=p_value < level,
        null_spec=f"alpha = {alpha0} (robust)",
        level=level,
        variance_used=sigma2,
        variance_source=engine.provenance(
            "lambda-star", alpha0, config.p, config.m, config.kappa
        ),
    )


def noise_test(
    path,
    config: EstimatorConfig | None = None,
    engine: VarianceEngine | None = None,
    level: float = 0.05,
) -> TestResult:
    """One-sided (upper tail) test of 'no additive observation noise'.

    The statistic contrasts the robust and plain estimates; additive noise
    drags the plain estimate toward -1/2 while the robust one stays put, so
    large positive values are evidence of noise.
    """
    _check_level(level)
    config = config or EstimatorConfig()
    engine = engine or VarianceEngine()
    est = estimate_alpha(path, config)
    est_r = estimate_alpha_robust(path, config)
    sigma2 = engine.sigma2_dstar(est_r.alpha_hat, config.p, config.m, config.kappa)
    stat = alpha_test_statistic(est_r.alpha_hat, est.alpha_hat, est.n, est.s_p_hat, sigma2)
    p_value = float(norm.sf(stat))
    return TestResult(
        statistic=stat,
        p_value=p_value,
        reject=p_value < level,
        null_spec="no noise",
        level=level,
        variance_used=sigma2,
        variance_source=engine.provenance(
            "lambda-star", est_r.alpha_hat, config.p, config.m, config.kappa
        ),
    )


def confidence_interval(
    estimate: FractalEstimate,
    engine: VarianceEngine | None = None,
    level: float = 0.05,
) -> tuple[float, float]:
    """Normal-limit confidence interval around a point estimate.

    ``level`` is the miscoverage (0.05 gives a 95% interval); the variance is
    evaluated at the point estimate since no null value exists.
    """
    _check_level(level)
    if not estimate.clt_regime_valid:
        raise CLTRegimeError(
            f"estimate alpha_hat={estimate.alpha_hat:.4f} is outside (-1/2, 1/4); "
            "the sqrt(n) normal limit does not apply"
        )
    engine = engine or VarianceEngine()
    config = estimate.config
    if estimate.robust:
        sigma2 = engine.sigma2_star(estimate.alpha_hat, config.p, config.m, config.kappa)
    else:
        sigma2 = engine.sigma2(estimate.alpha_hat, config.p, config.m)
    half = float(
        norm.ppf(1.0 - level / 2.0)
        * estimate.s_p_hat
        * math.sqrt(sigma2 / estimate.n)
    )
    return estimate.alpha_hat - half, estimate.alpha_hat + half


def standard_error(estimate: FractalEstimate, engine: VarianceEngine | None = None) -> float:
    """Plug-in standard error S_p * sqrt(sigma2(alpha_hat) / n)."""
    if not estimate.clt_regime_valid:
        raise CLTRegimeError(
            f"estimate alpha_hat={estimate.alpha_hat:.4f} is outside (-1/2, 1/4); "
            "the sqrt(n) normal limit does not apply"
        )
    engine = engine or VarianceEngine()
    config = estimate.config
    if estimate.robust:
        sigma2 = engine.sigma2_star(estimate.alpha_hat, config.p, config.m, config.kappa)
    else:
        sigma2 = engine.sigma2(estimate.alpha_hat, config.p, config.m)
    return estimate.s_p_hat * math.sqrt(sigma2 / estimate.n)
