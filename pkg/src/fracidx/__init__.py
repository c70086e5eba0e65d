"""Fractal (roughness) index estimation and inference for equidistant
time series: exact Gaussian simulators, power variograms, log-log
regression estimators (plain and noise-robust), Monte Carlo asymptotic
variances, hypothesis tests, and a CLI for simulation studies.
"""

from .errors import (
    CLTRegimeError,
    DegenerateStatisticError,
    DegenerateVariogramError,
    EmbeddingError,
    FracidxError,
    NonpositiveGapError,
    ValidationError,
)
from .models import (
    ConstantVol,
    GaussianModel,
    NoiseSpec,
    Path,
    SmoothOUVol,
    TwoRegimeVol,
    fgn_correlation,
    model_acf,
)
from .simulate import (
    add_noise,
    simulate_fbm,
    simulate_gamma_bss,
    simulate_stationary_gaussian,
)
from .variogram import (
    VariogramCurve,
    empirical_variogram,
    empirical_variogram_lags,
    fbm_variogram,
    kappa_difference,
    moment_constant,
    variogram_curve,
)
from .estimate import (
    EstimatorConfig,
    FractalEstimate,
    alpha_from_variograms,
    alpha_from_variograms_robust,
    design_vector,
    estimate_alpha,
    estimate_alpha_robust,
    estimate_sp,
)
from .asymvar import (
    DeltaMatrix,
    LagIndexSet,
    LambdaMatrix,
    VarianceEngine,
    lag_index_set,
    mc_lambda,
    mc_lambda_star,
    sigma1_matrix,
    sigma2_dstar,
    sigma2_matrix,
    sigma2_mp,
    sigma2_star,
)
from .infer import (
    TestResult,
    confidence_interval,
    noise_test,
    standard_error,
    test_alpha,
    test_alpha_robust,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
