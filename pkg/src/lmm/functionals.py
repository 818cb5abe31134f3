"""Plug-in estimation of symmetric functionals ``sum_i f(p_i)`` with ``f(0) = 0``."""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

import numpy as np

from .estimator import LmmConfig, lmm_measure
from .exceptions import ConfigurationError
from .measures import GridMeasure
from .sampling import CountVector


class Kind(str, enum.Enum):
    ENTROPY = "entropy"
    POWER_SUM = "power_sum"
    SUPPORT_SIZE = "support_size"


@dataclass(frozen=True)
class FunctionalSpec:
    kind: Kind
    alpha: float | None = None
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.POWER_SUM and not (self.alpha is not None and 0 < self.alpha < 1):
            raise ConfigurationError("power sum needs 0 < alpha < 1")
        if self.kind is Kind.SUPPORT_SIZE and not (self.k is not None and self.k >= 2):
            raise ConfigurationError("support size needs k >= 2")

    @classmethod
    def entropy(cls):
        return cls(Kind.ENTROPY)

    @classmethod
    def power_sum(cls, alpha: float):
        return cls(Kind.POWER_SUM, alpha=alpha)

    @classmethod
    def support_size(cls, k: int):
        return cls(Kind.SUPPORT_SIZE, k=int(k))

    def f(self, x) -> np.ndarray:
        """Pointwise map; ``f(0) = 0`` for every kind."""
        x = np.asarray(x, dtype=float)
        if self.kind is Kind.ENTROPY:
            out = np.zeros_like(x)
            pos = x > 0
            out[pos] = -x[pos] * np.log(x[pos])
            return out
        if self.kind is Kind.POWER_SUM:
            return np.where(x > 0, np.abs(x) ** self.alpha, 0.0)
        # midway threshold; the zero-mass zone keeps feasible measures off (0, 1/k)
        return (x >= 1.0 / (2 * self.k)).astype(float)

    def exact(self, probs) -> float:
        """Value of the functional at a probability vector."""
        p = np.asarray(probs, dtype=float)
        if self.kind is Kind.SUPPORT_SIZE:
            return float(np.count_nonzero(p > 0))
        return float(self.f(p).sum())


def plug_in(measure: GridMeasure, spec: FunctionalSpec) -> float:
    return float(np.dot(measure.masses, spec.f(measure.points)))


def functional_config(config: LmmConfig, spec: FunctionalSpec) -> LmmConfig:
    """Switch on the zero-mass zone ``(0, 1/k)`` for support size."""
    if spec.kind is Kind.SUPPORT_SIZE and config.support_lower is None:
        return dataclasses.replace(config, support_lower=1.0 / spec.k)
    return config


def estimate_functional(counts: CountVector, config: LmmConfig, spec: FunctionalSpec, rng) -> float:
    measure, _ = lmm_measure(counts, functional_config(config, spec), rng)
    return plug_in(measure, spec)


def baseline_functional(counts: CountVector, spec: FunctionalSpec) -> float:
    """Empirical plug-in; for support size, the number of distinct symbols."""
    c = counts.counts
    if spec.kind is Kind.SUPPORT_SIZE:
        return float(np.count_nonzero(c))
    total = c.sum()
    if total == 0:
        return 0.0
    return float(spec.f(c / total).sum())
