"""Local moment matching (LMM) estimator for a distribution up to permutation.

Pipeline: split the counts in two, localise every symbol with the first
half, match the first ``K`` centered moments of each interval against
unbiased estimates from the second half, sum the per-interval measures, and
turn the result into a sorted vector by randomized quantile discretization.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from ._backend import BACKEND
from .exceptions import ConfigurationError, SolverError
from .lpsolve import (
    FeasibilityProblem,
    constraint_residuals,
    discretize,
    grid_size,
    solve_feasibility,
    solve_min_mass,
)
from .measures import (
    GridMeasure,
    IntervalPartition,
    SortedVector,
    build_partition,
    interval_index,
)
from .moments import MomentTargets, moment_count, moment_targets
from .sampling import CountVector, SplitCounts, empirical, raw_frequencies, split_counts

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LmmConfig:
    """Constants of the estimator.

    ``c1`` sets the interval widths, ``c2`` the number of matched moments
    ``K = max(1, floor(c2 ln n))`` and ``c3`` the tolerance radii.
    ``theory_mode`` enforces ``c1 > 2 c2`` and ``c3 > 30 c1``.
    ``min_moments`` floors K; with a single moment the first interval's
    min-mass program degenerates (all mass jumps to the far edge), so the
    default is 2. ``support_lower`` (1/k) switches on the zero-mass constraint on
    ``(0, support_lower)`` used for support-size estimation.
    """

    c1: float = 2.0
    c2: float = 0.3
    c3: float = 0.055
    theory_mode: bool = False
    grid_factor: int = 8
    min_moments: int = 2
    support_size: int | None = None
    support_lower: float | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if int(self.grid_factor) != self.grid_factor or self.grid_factor < 1:
            raise ConfigurationError("grid_factor must be a positive integer")
        if int(self.min_moments) != self.min_moments or self.min_moments < 1:
            raise ConfigurationError("min_moments must be a positive integer")
        if self.support_size is not None and self.support_size < 1:
            raise ConfigurationError("support_size must be >= 1")
        if self.support_lower is not None and not 0 < self.support_lower <= 1:
            raise ConfigurationError("support_lower must lie in (0, 1]")
        if self.theory_mode:
            if not self.c1 > 2 * self.c2:
                raise ConfigurationError("theory mode requires c1 > 2 c2")
            if not self.c3 > 30 * self.c1:
                raise ConfigurationError("theory mode requires c3 > 30 c1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def theory(cls, **overrides) -> "LmmConfig":
        """Constants inside the regime covered by the error analysis."""
        params = dict(c1=2.0, c2=0.45, c3=61.0, theory_mode=True, min_moments=1)
        params.update(overrides)
        return cls(**params)


@dataclass
class LmmDiagnostics:
    n_half: float = 0.0
    K: int = 0
    M: int = 0
    interval_status: dict = field(default_factory=dict)
    S_j: dict = field(default_factory=dict)
    min_mass: float | None = None
    fallback: bool = False
    total_mass: float = 0.0
    wall_time: float = 0.0
    backend: str = BACKEND

    def to_dict(self) -> dict:
        d = asdict(self)
        d["interval_status"] = {str(k): v for k, v in self.interval_status.items()}
        d["S_j"] = {str(k): v for k, v in self.S_j.items()}
        return d


@dataclass(frozen=True)
class IntervalSetup:
    j: int
    members: np.ndarray
    targets: MomentTargets
    problem: FeasibilityProblem


@dataclass(frozen=True)
class _Localised:
    split: SplitCounts
    n: float
    partition: IntervalPartition
    assignment: np.ndarray
    second: np.ndarray


def _localise(counts: CountVector, config: LmmConfig, rng) -> _Localised:
    if counts.rate < 4:
        raise ConfigurationError(f"rate must be >= 4 so each half has rate >= 2, got {counts.rate}")
    split = split_counts(counts, rng)
    n = split.first.rate
    partition = build_partition(n, config.c1)
    assignment = interval_index(partition, empirical(split.first))
    return _Localised(split, n, partition, assignment, raw_frequencies(split.second))


def _grid_for(partition: IntervalPartition, j: int, G: int, support_lower: float | None) -> np.ndarray:
    lo, hi = partition.enlarged(j)
    grid = discretize(lo, hi, G, include_zero=(j == 1))
    if j == 1 and grid[0] > 0:
        grid = np.concatenate([[0.0], grid])
    if support_lower is not None and lo <= support_lower <= hi:
        # the zone is open, so its right end stays admissible
        grid = np.union1d(grid, [support_lower])
    return grid


def interval_setups(loc: _Localised, config: LmmConfig):
    """Yield one :class:`IntervalSetup` per interval that needs a program."""
    K = moment_count(loc.n, config.c2, config.min_moments)
    zone = (0.0, config.support_lower) if config.support_lower is not None else None
    for j in range(1, loc.partition.M + 1):
        idx = np.flatnonzero(loc.assignment == j)
        if j >= 2 and idx.size == 0:
            continue
        targets = moment_targets(loc.partition, j, loc.second[idx], loc.n, config)
        lo, hi = loc.partition.enlarged(j)
        G = grid_size(K, config.grid_factor, (hi - lo) / targets.scale, idx.size, targets.log_n)
        problem = FeasibilityProblem(
            grid=_grid_for(loc.partition, j, G, config.support_lower),
            center=targets.center,
            scale=targets.scale,
            targets=targets.targets,
            tolerances=targets.tolerances,
            total_mass=float(idx.size) if j >= 2 else None,
            forbidden_zone=zone,
            log_n=targets.log_n if j == 1 else None,
        )
        yield IntervalSetup(j, idx, targets, problem)


def _mass_upper(loc: _Localised, idx: np.ndarray, config: LmmConfig, rate: float) -> float:
    if config.support_size is not None:
        return float(config.support_size)
    seen = (loc.split.first.counts[idx] > 0) | (loc.split.second.counts[idx] > 0)
    return float(np.count_nonzero(seen)) + rate


def fallback_measure(second: np.ndarray) -> GridMeasure:
    """Unit atoms at the second-half empirical frequencies."""
    return GridMeasure.from_atoms(np.clip(second, 0.0, 1.0))


def lmm_measure(counts: CountVector, config: LmmConfig, rng: np.random.Generator):
    """Run the interval programs and return ``(measure, diagnostics)``."""
    start = time.perf_counter()
    loc = _localise(counts, config, rng)
    diag = LmmDiagnostics(
        n_half=loc.n,
        K=moment_count(loc.n, config.c2, config.min_moments),
        M=loc.partition.M,
    )
    pieces = []
    failed = False
    for setup in interval_setups(loc, config):
        j = setup.j
        diag.S_j[j] = int(setup.members.size)
        try:
            if j == 1:
                outcome = solve_min_mass(setup.problem, _mass_upper(loc, setup.members, config, counts.rate))
                diag.min_mass = outcome.mass
            else:
                outcome = solve_feasibility(setup.problem)
        except SolverError as exc:
            log.warning("interval %d: %s", j, exc)
            diag.interval_status[j] = "solver-error"
            failed = True
            continue
        diag.interval_status[j] = outcome.status.value
        if outcome.feasible:
            pieces.append(outcome.measure)
        else:
            failed = True

    if failed:
        measure = fallback_measure(loc.second)
    else:
        measure = GridMeasure.empty()
        for piece in pieces:
            measure = measure + piece
    diag.fallback = failed
    diag.total_mass = measure.total_mass
    diag.wall_time = time.perf_counter() - start
    return measure, diag


def discretize_to_vector(measure: GridMeasure, rng: np.random.Generator) -> SortedVector:
    """Randomized quantile discretization of ``measure / S0``, ``S0 = ceil(mass)``.

    The deficit ``S0 - mass`` is added at 0 first, so the output has ``S0``
    entries. Works in unnormalised units so unit atoms map exactly.
    """
    total = measure.total_mass
    if total < 0:
        raise ConfigurationError("measure has negative mass")
    S0 = max(1, math.ceil(total - 1e-9))
    deficit = S0 - total
    if deficit > 0:
        measure = measure.with_atom(0.0, deficit)
    cum = np.cumsum(measure.masses)
    U = 1.0 - rng.random(S0)  # in (0, 1]
    levels = np.arange(1, S0 + 1) - U
    idx = np.searchsorted(cum, levels, side="right")
    idx = np.minimum(idx, measure.points.size - 1)
    return SortedVector(np.sort(measure.points[idx]))


def lmm_estimate(counts: CountVector, config: LmmConfig, rng: np.random.Generator):
    """Sorted distribution estimate and diagnostics."""
    measure, diag = lmm_measure(counts, config, rng)
    return discretize_to_vector(measure, rng), diag


def _snap(points: np.ndarray, grid: np.ndarray) -> np.ndarray:
    pos = np.clip(np.searchsorted(grid, points), 1, grid.size - 1)
    left, right = grid[pos - 1], grid[pos]
    return np.where(points - left <= right - points, left, right)


def truth_feasibility(counts: CountVector, probs, config: LmmConfig, rng: np.random.Generator) -> dict:
    """Check whether the true measure of each interval satisfies its constraints.

    For every interval the atoms ``p_i`` of the symbols assigned to it are
    snapped to the LP grid and tested against the fixed-mass constraints
    (interval 1: radii evaluated at its true symbol count). Returns
    ``{j: bool}``.
    """
    probs = np.asarray(probs, dtype=float)
    loc = _localise(counts, config, rng)
    result = {}
    for setup in interval_setups(loc, config):
        atoms = _snap(probs[setup.members], setup.problem.support())
        truth = GridMeasure.from_atoms(atoms)
        mass = float(setup.members.size)
        if setup.j == 1:
            slack = constraint_residuals(setup.problem, truth, mass)
        else:
            slack = constraint_residuals(setup.problem, truth)
        result[setup.j] = bool(np.all(slack >= 0))
    return result
