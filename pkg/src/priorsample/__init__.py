"""Posterior approximation by weighting, copying or resampling prior draws."""

__version__ = "0.1.0"

from .core import (
    amplify,
    box,
    copy_counts,
    draw_prior,
    evaluate_log_likelihood,
    half_line,
    laps,
    lips,
    normalize_weights,
    posterior_expectation,
    posterior_probability,
    resample,
    slips,
    weigh,
)
from .diagnostics import (
    DiagnosticsReport,
    asymptotic_variance_hat,
    d2_hat,
    diagnose,
    ess,
    high_information_sweep,
    ks_distance,
    replication_variance_study,
    variance_bound,
)
from .engine import reduce_sum, run_sharded
from .estimator import PriorPosteriorSampler
from .rng import Stream
from .types import (
    CopyExplosion,
    DrawBatch,
    InvalidLikelihood,
    ModelSpec,
    PriorSampleError,
    ShardFailure,
    TotalUnderflow,
    UnweightedPosterior,
    WeightedPosterior,
)

__all__ = [
    "amplify",
    "asymptotic_variance_hat",
    "box",
    "copy_counts",
    "CopyExplosion",
    "d2_hat",
    "diagnose",
    "DiagnosticsReport",
    "draw_prior",
    "DrawBatch",
    "ess",
    "evaluate_log_likelihood",
    "half_line",
    "high_information_sweep",
    "InvalidLikelihood",
    "ks_distance",
    "laps",
    "lips",
    "ModelSpec",
    "normalize_weights",
    "posterior_expectation",
    "posterior_probability",
    "PriorPosteriorSampler",
    "PriorSampleError",
    "reduce_sum",
    "replication_variance_study",
    "resample",
    "run_sharded",
    "ShardFailure",
    "slips",
    "Stream",
    "TotalUnderflow",
    "UnweightedPosterior",
    "variance_bound",
    "weigh",
    "WeightedPosterior",
]
