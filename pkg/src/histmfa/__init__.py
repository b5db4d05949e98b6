"""Multiple factor analysis of histogram-valued data on quantile encodings."""
from .distributions import (
    DistributionSummary,
    DomainError,
    EquiDepthHistogram,
    Histogram,
    QuantileFunction,
    decompose_distance,
    distributional_variance,
    frechet_mean,
    histogram_from_samples,
    homogenize,
    summarize,
    to_quantile_function,
    wasserstein_sq_closed,
    wasserstein_sq_integral,
)
from .quantiles import (
    BlockSet,
    QuantileTable,
    UnitWeights,
    build_quantile_table,
    center_columns,
    concatenate,
    covariance_block,
    trace_variance_gap,
)
from .mfa import (
    EigenSystem,
    MfaModel,
    PartialPca,
    contributions,
    global_mfa,
    moment_axis_diagnostics,
    partial_pca,
    rv_coefficient,
    weighted_svd,
)

__version__ = "0.1.0"
