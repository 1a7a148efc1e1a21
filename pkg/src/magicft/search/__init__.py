"""Random sampling, probability estimation and local optimization of measurement sequences."""

from .estimate import ProbabilityEstimate, estimate_sufficiency_probability
from .metrics import StageMetrics, stage_metrics
from .optimize import OptimizeResult, local_optimize
from .sampler import PROFILES, SamplerConstraints, get_profile, sample_sequence

__all__ = [
    "PROFILES",
    "OptimizeResult",
    "ProbabilityEstimate",
    "SamplerConstraints",
    "StageMetrics",
    "estimate_sufficiency_probability",
    "get_profile",
    "local_optimize",
    "sample_sequence",
    "stage_metrics",
]
