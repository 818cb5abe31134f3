"""Unbiased local moment estimators and per-interval moment targets.

Under the Poissonized model ``n * p_hat ~ Poisson(n * p)``, the falling
factorial ``prod_{l<L} (p_hat - l/n)`` is unbiased for ``p**L``. Expanding
``(p - x)**k`` binomially gives an unbiased estimator of the centered moment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .exceptions import ConfigurationError
from .measures import IntervalPartition


def g(k: int, x: float, p_hat, n: float):
    """Unbiased estimate of ``(p - x)**k`` from an observed frequency ``p_hat``.

    ``p_hat`` may be an array; the result then has the same shape.
    """
    if k < 0 or int(k) != k:
        raise ConfigurationError(f"moment order must be a nonnegative integer, got {k}")
    if not n > 0:
        raise ConfigurationError(f"rate must be positive, got {n}")
    p = np.asarray(p_hat, dtype=float)
    falling = np.ones_like(p)
    total = (-x) ** k * falling
    for l in range(1, k + 1):
        falling = falling * (p - (l - 1) / n)
        total = total + math.comb(k, l) * (-x) ** (k - l) * falling
    if total.ndim == 0:
        return float(total)
    return total


def summed_g(K: int, x: float, p_hats, n: float) -> np.ndarray:
    """``[sum_i g(k, x, p_hats[i], n) for k in 1..K]`` in one pass."""
    F = kernels.falling_factorial_sums(np.asarray(p_hats, dtype=float), float(n), int(K))
    out = np.empty(K)
    for k in range(1, K + 1):
        out[k - 1] = sum(math.comb(k, l) * (-x) ** (k - l) * F[l] for l in range(k + 1))
    return out


def moment_count(n: float, c2: float, minimum: int = 1) -> int:
    """Number of matched moments, ``max(minimum, floor(c2 ln n))``."""
    return max(int(minimum), int(math.floor(c2 * math.log(n))))


def interval_scale(j: int, n: float, c3: float) -> float:
    return c3 * j * math.log(n) / n


@dataclass(frozen=True)
class MomentTargets:
    """Right-hand sides of one interval's moment constraints.

    ``targets[k-1]`` estimates ``sum_i (p_i - center)**k`` over the symbols
    assigned to the interval; ``tolerances[k-1]`` is the allowed deviation
    ``sqrt(S_j ln n) * scale**k``.
    """

    interval: int
    K: int
    S_j: int
    center: float
    scale: float
    log_n: float
    targets: np.ndarray
    tolerances: np.ndarray

    def radius(self, mass: float) -> np.ndarray:
        """Tolerances as a function of total mass (used by the min-mass program)."""
        k = np.arange(1, self.K + 1)
        return math.sqrt(max(mass, 0.0) * self.log_n) * self.scale**k


def moment_targets(partition: IntervalPartition, j: int, members, n: float, config) -> MomentTargets:
    """Build targets for interval ``j`` from second-half frequencies ``members``.

    ``config`` supplies ``c2``, ``c3`` and optionally ``min_moments``.
    ``members`` are raw (unclamped) frequencies ``count / n``.
    """
    if not n >= 2:
        raise ConfigurationError("rate must be >= 2")
    if not 1 <= j <= partition.M:
        raise ConfigurationError(f"interval {j} outside 1..{partition.M}")
    members = np.asarray(members, dtype=float)
    K = moment_count(n, config.c2, getattr(config, "min_moments", 1))
    x = partition.center(j)
    r = interval_scale(j, n, config.c3)
    log_n = math.log(n)
    S_j = int(members.size)
    targets = summed_g(K, x, members, n) if S_j else np.zeros(K)
    k = np.arange(1, K + 1)
    tolerances = math.sqrt(S_j * log_n) * r**k
    return MomentTargets(
        interval=j,
        K=K,
        S_j=S_j,
        center=x,
        scale=r,
        log_n=log_n,
        targets=targets,
        tolerances=tolerances,
    )
