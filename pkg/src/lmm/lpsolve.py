"""Moment-matching linear programs over measures supported on a grid.

Variables are the masses ``w_g >= 0`` at grid points. Moment constraints are
written in the scaled basis ``((g - center) / scale)**k`` so that all rows
have comparable magnitude.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from ._kernels_py import ITERATION_LIMIT, OPTIMAL
from .exceptions import ConfigurationError, SolverError
from .measures import GridMeasure

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-7
BISECTION_STEPS = 40
CONDITIONING_LIMIT = 1e6


class LpStatus(str, enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class FeasibilityProblem:
    """One interval's moment-matching program.

    ``tolerances`` are the fixed-mass radii. When ``log_n`` is set the
    min-mass program recomputes them as ``sqrt(m log_n) * scale**k``.
    ``forbidden_zone`` is an open interval where the measure must vanish.
    """

    grid: np.ndarray
    center: float
    scale: float
    targets: np.ndarray
    tolerances: np.ndarray
    total_mass: float | None = None
    forbidden_zone: tuple[float, float] | None = None
    log_n: float | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ConfigurationError("grid must be a nonempty vector")
        if np.any(np.diff(grid) <= 0):
            raise ConfigurationError("grid must be strictly increasing")
        if self.total_mass is not None and self.total_mass < 0:
            raise ConfigurationError("total_mass must be nonnegative")
        if np.any(np.asarray(self.tolerances) < 0):
            raise ConfigurationError("tolerances must be nonnegative")
        if not self.scale > 0:
            raise ConfigurationError("scale must be positive")
        if len(self.targets) != len(self.tolerances) or len(self.targets) < 1:
            raise ConfigurationError("need K >= 1 targets and as many tolerances")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "targets", np.asarray(self.targets, dtype=float))
        object.__setattr__(self, "tolerances", np.asarray(self.tolerances, dtype=float))

    @property
    def K(self) -> int:
        return len(self.targets)

    def support(self) -> np.ndarray:
        """Grid points allowed to carry mass."""
        if self.forbidden_zone is None:
            return self.grid
        a, b = self.forbidden_zone
        return self.grid[~((self.grid > a) & (self.grid < b))]

    def radius(self, mass: float) -> np.ndarray:
        if self.log_n is None:
            raise ConfigurationError("mass-dependent radius needs log_n")
        k = np.arange(1, self.K + 1)
        return math.sqrt(max(mass, 0.0) * self.log_n) * self.scale**k


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    measure: GridMeasure | None
    residuals: dict = field(default_factory=dict)
    mass: float | None = None

    @property
    def feasible(self) -> bool:
        return self.status is LpStatus.FEASIBLE


def discretize(lo: float, hi: float, G: int, include_zero: bool = False) -> np.ndarray:
    """``G`` equally spaced points on ``[lo, hi]``, optionally with 0 prepended."""
    if G < 2:
        raise ConfigurationError("grid needs at least 2 points")
    if lo > hi:
        raise ConfigurationError("lo must not exceed hi")
    pts = np.unique(np.linspace(lo, hi, G))
    if include_zero and lo > 0:
        pts = np.concatenate([[0.0], pts])
    return pts


MAX_GRID = 4096


def grid_size(K: int, grid_factor: int = 8, scaled_width: float = 0.0, S_j: int = 0, log_n: float = 1.0) -> int:
    """Points per interval: ``max(64, grid_factor*K)``, refined so that the
    scaled spacing stays below ``(log_n / S_j)**(1/4)``.

    Splitting an atom between two neighbours at scaled spacing ``d`` inflates
    the second moment by up to ``S_j d**2 / 4``; this keeps it inside the
    ``sqrt(S_j log_n)`` radius.
    """
    G = max(64, grid_factor * K)
    if S_j > 0 and scaled_width > 0:
        spacing = (log_n / S_j) ** 0.25
        G = max(G, math.ceil(scaled_width / spacing) + 1)
    return min(G, MAX_GRID)


def scaled_basis(points, center: float, scale: float, K: int) -> np.ndarray:
    """``Phi[k-1, g] = ((points[g] - center) / scale)**k``."""
    y = (np.asarray(points, dtype=float) - center) / scale
    return np.vstack([y**k for k in range(1, K + 1)])


def _solve_fixed_mass(problem: FeasibilityProblem, mass: float, tolerances: np.ndarray) -> LpOutcome:
    pts = problem.support()
    K = problem.K
    r_pow = problem.scale ** np.arange(1, K + 1)
    t = problem.targets / r_pow
    tau = tolerances / r_pow
    phi = scaled_basis(pts, problem.center, problem.scale, K)
    biggest = float(np.abs(phi).max()) if phi.size else 0.0

    G = pts.size
    # rows: mass, K upper bounds (+slack), K lower bounds (-surplus)
    A = np.zeros((1 + 2 * K, G + 2 * K))
    b = np.empty(1 + 2 * K)
    A[0, :G] = 1.0
    b[0] = mass
    A[1 : K + 1, :G] = phi
    A[1 : K + 1, G : G + K] = np.eye(K)
    b[1 : K + 1] = t + tau
    A[K + 1 :, :G] = phi
    A[K + 1 :, G + K :] = -np.eye(K)
    b[K + 1 :] = t - tau
    norm = np.maximum(1.0, np.abs(A).max(axis=1))
    A /= norm[:, None]
    b /= norm
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1

    max_iter = 50 * (A.shape[0] + A.shape[1])
    x, infeas, iters, status = kernels.phase1_simplex(A, b, max_iter)
    if status != OPTIMAL:
        reason = "iteration limit" if status == ITERATION_LIMIT else "unbounded phase-1"
        raise SolverError(f"simplex failed ({reason}) after {iters} pivots")
    residuals = {"phase1_objective": infeas, "pivots": iters, "max_scaled_coefficient": biggest}
    if infeas > FEASIBILITY_TOL:
        return LpOutcome(LpStatus.INFEASIBLE, None, residuals, mass)
    w = np.maximum(x[:G], 0.0)
    measure = GridMeasure(pts, w).pruned()
    return LpOutcome(LpStatus.FEASIBLE, measure, residuals, mass)


def max_scaled_coefficient(problem: FeasibilityProblem) -> float:
    """Largest ``|((g - center) / scale)**k|`` over the support and ``k <= K``."""
    y = np.abs(problem.support() - problem.center) / problem.scale
    return float(y.max() ** problem.K) if y.size else 0.0


def _note_conditioning(problem: FeasibilityProblem) -> None:
    biggest = max_scaled_coefficient(problem)
    if biggest > CONDITIONING_LIMIT:
        log.info("scaled moment basis reaches %.3g; LP may be poorly conditioned", biggest)


def solve_feasibility(problem: FeasibilityProblem) -> LpOutcome:
    """Find any measure of mass ``total_mass`` meeting all moment constraints."""
    if problem.total_mass is None:
        raise ConfigurationError("solve_feasibility needs total_mass")
    if problem.total_mass == 0:
        ok = np.all(np.abs(problem.targets) <= problem.tolerances)
        status = LpStatus.FEASIBLE if ok else LpStatus.INFEASIBLE
        return LpOutcome(status, GridMeasure.empty() if ok else None, {"phase1_objective": 0.0}, 0.0)
    _note_conditioning(problem)
    return _solve_fixed_mass(problem, problem.total_mass, problem.tolerances)


def solve_min_mass(problem: FeasibilityProblem, mass_upper: float) -> LpOutcome:
    """Smallest mass ``m`` (by bisection) whose fixed-mass program is feasible.

    Radii grow with ``m``; if the grid holds the center point, extra mass
    there leaves every centered moment unchanged, so feasibility is monotone.
    """
    if problem.log_n is None:
        raise ConfigurationError("solve_min_mass needs log_n")
    if np.all(problem.targets == 0):
        return LpOutcome(LpStatus.FEASIBLE, GridMeasure.empty(), {"bisection_steps": 0}, 0.0)
    if not np.any(np.isclose(problem.support(), problem.center, rtol=0, atol=1e-15)):
        log.info("center not on grid; min-mass bisection may not return the minimal mass")
    _note_conditioning(problem)

    def attempt(m):
        p = replace(problem, total_mass=m)
        return _solve_fixed_mass(p, m, problem.radius(m))

    best = attempt(mass_upper)
    if not best.feasible:
        return best
    lo, hi = 0.0, float(mass_upper)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        out = attempt(mid)
        if out.feasible:
            hi, best = mid, out
        else:
            lo = mid
    res = dict(best.residuals)
    res["bisection_steps"] = BISECTION_STEPS
    res["bracket"] = (lo, hi)
    return replace(best, residuals=res)


def constraint_residuals(problem: FeasibilityProblem, measure: GridMeasure, mass: float | None = None) -> np.ndarray:
    """Per-moment slack ``tol_k - |moment_k - target_k|`` in unscaled units.

    Independent of the solver: evaluates the raw centered moments of
    ``measure``. For the min-mass program pass ``mass`` to use mass-dependent
    radii. Negative entries are violations.
    """
    pts, w = measure.points, measure.masses
    K = problem.K
    moments = np.array([np.dot(w, (pts - problem.center) ** k) for k in range(1, K + 1)])
    if mass is not None and problem.log_n is not None:
        tol = problem.radius(mass)
    else:
        tol = problem.tolerances
    return tol - np.abs(moments - problem.targets)


def verify_outcome(problem: FeasibilityProblem, outcome: LpOutcome, rel: float = 1e-6) -> bool:
    """Re-check a feasible outcome against the unscaled constraints."""
    if not outcome.feasible:
        return True
    m = outcome.measure
    if problem.forbidden_zone is not None and m.points.size:
        a, b = problem.forbidden_zone
        if np.any((m.points > a) & (m.points < b) & (m.masses > 0)):
            return False
    if m.points.size and (m.points[0] < problem.grid[0] - 1e-15 or m.points[-1] > problem.grid[-1] + 1e-15):
        return False
    target_mass = outcome.mass if problem.total_mass is None else problem.total_mass
    mass_dependent = problem.total_mass is None
    tol_k = problem.radius(target_mass) if mass_dependent else problem.tolerances
    slack = constraint_residuals(problem, m, target_mass if mass_dependent else None)
    ok_moments = np.all(slack >= -rel * np.maximum(1.0, tol_k))
    ok_mass = abs(m.total_mass - target_mass) <= 1e-6 * max(1.0, target_mass)
    return bool(ok_moments and ok_mass)
