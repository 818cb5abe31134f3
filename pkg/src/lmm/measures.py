"""Value types: distributions, sorted vectors, grid measures, interval geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability vector over S symbols."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 1 or p.size == 0:
            raise ConfigurationError("probs must be a nonempty 1-d vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ConfigurationError("probs must be finite and nonnegative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ConfigurationError(f"probs sum to {p.sum()!r}, expected 1")
        object.__setattr__(self, "probs", p)

    @property
    def S(self) -> int:
        return self.probs.size

    def sorted(self) -> "SortedVector":
        return sort_ascending(self.probs)


@dataclass(frozen=True)
class SortedVector:
    """Nonnegative vector in nondecreasing order."""

    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 1:
            raise ConfigurationError("values must be 1-d")
        if np.any(v < 0):
            raise ConfigurationError("values must be nonnegative")
        if np.any(np.diff(v) < 0):
            raise ConfigurationError("values must be nondecreasing")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def padded(self, length: int) -> np.ndarray:
        """Prepend zeros up to ``length`` entries (order is preserved)."""
        extra = max(0, length - self.values.size)
        return np.concatenate([np.zeros(extra), self.values])


def sort_ascending(probs) -> SortedVector:
    x = np.asarray(probs, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ConfigurationError("entries must be finite")
    return SortedVector(np.sort(x, kind="stable"))


@dataclass(frozen=True)
class GridMeasure:
    """Finitely supported nonnegative measure on [0, 1].

    Atoms with equal location are merged at construction; use
    :meth:`from_atoms` for unsorted or duplicated input.
    """

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        ms = _frozen(self.masses)
        if pts.ndim != 1 or pts.shape != ms.shape:
            raise ConfigurationError("points and masses must be 1-d of equal length")
        if pts.size and (pts[0] < 0 or pts[-1] > 1):
            raise ConfigurationError("points must lie in [0, 1]")
        if np.any(np.diff(pts) <= 0):
            raise ConfigurationError("points must be strictly increasing")
        if np.any(ms < 0) or not np.all(np.isfinite(ms)):
            raise ConfigurationError("masses must be finite and nonnegative")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", ms)

    @classmethod
    def from_atoms(cls, points, masses=None) -> "GridMeasure":
        pts = np.asarray(points, dtype=float).ravel()
        ms = np.ones_like(pts) if masses is None else np.asarray(masses, dtype=float).ravel()
        if pts.shape != ms.shape:
            raise ConfigurationError("points and masses must have equal length")
        uniq, inv = np.unique(pts, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inv, ms)
        return cls(uniq, merged)

    @classmethod
    def empty(cls) -> "GridMeasure":
        return cls(np.zeros(0), np.zeros(0))

    @classmethod
    def uniform_on(cls, values) -> "GridMeasure":
        """The counting measure S * mu_P: one unit atom per entry of ``values``."""
        return cls.from_atoms(values)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def __add__(self, other: "GridMeasure") -> "GridMeasure":
        return GridMeasure.from_atoms(
            np.concatenate([self.points, other.points]),
            np.concatenate([self.masses, other.masses]),
        )

    def scaled(self, factor: float) -> "GridMeasure":
        return GridMeasure(self.points, self.masses * factor)

    def with_atom(self, point: float, mass: float) -> "GridMeasure":
        return self + GridMeasure(np.array([point]), np.array([mass]))

    def pruned(self, tol: float = 0.0) -> "GridMeasure":
        keep = self.masses > tol
        return GridMeasure(self.points[keep], self.masses[keep])

    def moment(self, k: int, center: float = 0.0) -> float:
        return float(np.dot(self.masses, (self.points - center) ** k))


@dataclass(frozen=True)
class IntervalPartition:
    """Quadratically growing partition of [0, 1] and its enlarged windows.

    Interval ``j`` (1-based) is ``[lo[j-1], hi[j-1])``; the last one is closed
    at 1. Arrays are indexed from zero.
    """

    n: float
    c1: float
    unit_width: float
    M: int
    lo: np.ndarray
    hi: np.ndarray
    centers: np.ndarray
    lo_enlarged: np.ndarray
    hi_enlarged: np.ndarray

    def interval(self, j: int) -> tuple[float, float]:
        return float(self.lo[j - 1]), float(self.hi[j - 1])

    def enlarged(self, j: int) -> tuple[float, float]:
        return float(self.lo_enlarged[j - 1]), float(self.hi_enlarged[j - 1])

    def center(self, j: int) -> float:
        return float(self.centers[j - 1])


def build_partition(n: float, c1: float) -> IntervalPartition:
    if not n >= 2:
        raise ConfigurationError(f"sample rate must be >= 2, got {n}")
    if not c1 > 0:
        raise ConfigurationError(f"c1 must be positive, got {c1}")
    w = c1 * math.log(n) / n
    M = max(1, math.ceil(math.sqrt(1.0 / w)))
    j = np.arange(1, M + 1, dtype=float)
    lo = np.minimum(w * (j - 1) ** 2, 1.0)
    hi = np.minimum(w * j**2, 1.0)
    hi[-1] = 1.0
    # the last center can overshoot 1 when M was rounded up
    centers = np.minimum(w * j * (j - 1), hi)
    lo_enl = np.where(j >= 2, w * (j - 1.5) ** 2, 0.0)
    lo_enl = np.minimum(lo_enl, lo)
    hi_enl = np.minimum(w * (j + 1) ** 2, 1.0)
    return IntervalPartition(
        n=float(n),
        c1=float(c1),
        unit_width=w,
        M=M,
        lo=_frozen(lo),
        hi=_frozen(hi),
        centers=_frozen(centers),
        lo_enlarged=_frozen(lo_enl),
        hi_enlarged=_frozen(hi_enl),
    )


def interval_index(partition: IntervalPartition, p):
    """1-based index of the interval holding ``p`` (scalar or array)."""
    arr = np.asarray(p, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1) or np.any(np.isnan(arr)):
        raise ConfigurationError("p must lie in [0, 1]")
    j = np.searchsorted(partition.lo, arr, side="right")
    j = np.clip(j, 1, partition.M)
    if arr.ndim == 0:
        return int(j)
    return j.astype(np.int64)
