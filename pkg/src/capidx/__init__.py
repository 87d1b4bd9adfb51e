"""Capability indices for unilateral tolerances: closed forms, non-normal
percentile generalizations, exact estimator distributions, and a seeded
Monte Carlo oracle."""

__version__ = "0.1.0"

from .errors import (
    CapidxError,
    ConvergenceError,
    DegenerateFitError,
    DomainError,
    MomentExistenceError,
)
from .indices import (
    BilateralSpec,
    IndexParams,
    IndexReport,
    LegacyFamily,
    ProcessParams,
    Side,
    ToleranceSpec,
    chen_pearn_index,
    classical_indices,
    embed_bilateral,
    legacy_index,
    mean_position_from_ratio,
    reduced_v,
    unilateral_index,
    unilateral_report,
)
from .nonnormal import (
    PercentileSummary,
    QuantileMethod,
    ShoreFit,
    nonnormal_unilateral_index,
    shore_fit,
    shore_quantile,
    summarize_sample,
)
from .estimators import (
    DensityCurve,
    EstimatorContext,
    Variant,
    YDensityParams,
    YSide,
    closed_form_cpku_moments,
    density_cpu_hat,
    density_curve,
    density_general_asymmetric,
    density_unilateral,
    mean_variance_cpu_hat,
    moment_asymmetric,
    moment_unilateral,
    moments_cpu_hat,
    y_density,
)
from .montecarlo import SimConfig, SimResult, compare_to_analytics, simulate_estimator
from .normality import chi_square_normality_test

__all__ = [name for name in dir() if not name.startswith("_")]
