"""Estimate a discrete distribution up to permutation by local moment matching."""

from ._backend import BACKEND
from .estimator import LmmConfig, LmmDiagnostics, discretize_to_vector, lmm_estimate, lmm_measure
from .exceptions import ConfigurationError, SolverError
from .functionals import FunctionalSpec, baseline_functional, estimate_functional, plug_in
from .measures import (
    DiscreteDistribution,
    GridMeasure,
    IntervalPartition,
    SortedVector,
    build_partition,
    interval_index,
    sort_ascending,
)
from .metrics import RiskReport, matching_oracle, monte_carlo_risk, sorted_l1, vector_measure, wasserstein_1d
from .moments import MomentTargets, g, moment_targets
from .sampling import (
    CountVector,
    SplitCounts,
    draw_multinomial,
    draw_poissonized,
    empirical,
    make_distribution,
    split_counts,
    trial_rng,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigurationError",
    "CountVector",
    "DiscreteDistribution",
    "FunctionalSpec",
    "GridMeasure",
    "IntervalPartition",
    "LmmConfig",
    "LmmDiagnostics",
    "MomentTargets",
    "RiskReport",
    "SolverError",
    "SortedVector",
    "SplitCounts",
    "baseline_functional",
    "build_partition",
    "discretize_to_vector",
    "draw_multinomial",
    "draw_poissonized",
    "empirical",
    "estimate_functional",
    "g",
    "interval_index",
    "lmm_estimate",
    "lmm_measure",
    "make_distribution",
    "matching_oracle",
    "moment_targets",
    "monte_carlo_risk",
    "plug_in",
    "sort_ascending",
    "sorted_l1",
    "split_counts",
    "trial_rng",
    "vector_measure",
    "wasserstein_1d",
]
