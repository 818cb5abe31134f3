"""Sampling models, sample splitting and benchmark distribution families."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError
from .measures import DiscreteDistribution


@dataclass(frozen=True)
class CountVector:
    """Per-symbol counts together with the rate they were drawn at."""

    counts: np.ndarray
    rate: float

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64, copy=True)
        if c.ndim != 1:
            raise ConfigurationError("counts must be 1-d")
        if np.any(c < 0):
            raise ConfigurationError("counts must be nonnegative")
        if not self.rate > 0:
            raise ConfigurationError(f"rate must be positive, got {self.rate}")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "rate", float(self.rate))

    def __len__(self) -> int:
        return self.counts.size


@dataclass(frozen=True)
class SplitCounts:
    first: CountVector
    second: CountVector


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for one trial, derived only from (seed, trial)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


def family_rng(seed: int) -> np.random.Generator:
    """Stream for drawing a random benchmark distribution, disjoint from every trial stream."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), 0, 1]))


def draw_poissonized(dist: DiscreteDistribution, n: float, rng: np.random.Generator) -> CountVector:
    if not n > 0:
        raise ConfigurationError("n must be positive")
    return CountVector(rng.poisson(n * dist.probs), n)


def draw_multinomial(dist: DiscreteDistribution, n: int, rng: np.random.Generator) -> CountVector:
    if int(n) != n or n < 1:
        raise ConfigurationError("n must be a positive integer")
    # renormalise against float drift; numpy rejects sums slightly above 1
    p = dist.probs / dist.probs.sum()
    return CountVector(rng.multinomial(int(n), p), n)


def split_counts(counts: CountVector, rng: np.random.Generator) -> SplitCounts:
    """Binomial thinning: each observation goes to either half with prob 1/2."""
    first = rng.binomial(counts.counts, 0.5)
    second = counts.counts - first
    half = counts.rate / 2
    return SplitCounts(CountVector(first, half), CountVector(second, half))


def empirical(counts: CountVector) -> np.ndarray:
    """Frequencies ``counts / rate`` clamped to [0, 1].

    Poisson counts can exceed the rate; the clamp only matters for interval
    lookup. Moment estimators use :func:`raw_frequencies`.
    """
    return np.minimum(counts.counts / counts.rate, 1.0)


def raw_frequencies(counts: CountVector) -> np.ndarray:
    return counts.counts / counts.rate


FAMILIES = ("uniform", "zipf", "two_level", "dirichlet")


def make_distribution(family: str, S: int, rng: np.random.Generator | None = None, **params) -> DiscreteDistribution:
    """Benchmark distributions.

    ``uniform``; ``zipf`` (``s``, default 1) with p_i proportional to i^-s;
    ``two_level`` (``fraction``, ``ratio``): the first ``round(fraction*S)``
    symbols carry ``ratio`` times the mass of the rest; ``dirichlet``
    (``alpha``) needs ``rng``.
    """
    S = int(S)
    if S < 1:
        raise ConfigurationError("S must be >= 1")
    if family == "uniform":
        w = np.ones(S)
    elif family == "zipf":
        s = float(params.get("s", 1.0))
        if s < 0:
            raise ConfigurationError("zipf exponent must be >= 0")
        w = np.arange(1, S + 1, dtype=float) ** -s
    elif family == "two_level":
        fraction = float(params.get("fraction", 0.5))
        ratio = float(params.get("ratio", 10.0))
        if not 0 <= fraction <= 1 or ratio <= 0:
            raise ConfigurationError("two_level needs 0 <= fraction <= 1 and ratio > 0")
        w = np.ones(S)
        w[: int(round(fraction * S))] = ratio
    elif family == "dirichlet":
        alpha = float(params.get("alpha", 1.0))
        if alpha <= 0:
            raise ConfigurationError("dirichlet alpha must be positive")
        if rng is None:
            raise ConfigurationError("dirichlet family needs an rng")
        w = rng.dirichlet(np.full(S, alpha))
    else:
        raise ConfigurationError(f"unknown family {family!r}; expected one of {FAMILIES}")
    unknown = set(params) - {"s", "fraction", "ratio", "alpha"}
    if unknown:
        raise ConfigurationError(f"unknown parameters {sorted(unknown)}")
    return DiscreteDistribution(w / w.sum())


def parse_family(text: str) -> tuple[str, dict]:
    """Parse ``"zipf:s=1.5"`` or ``"two_level:fraction=0.2,ratio=5"``."""
    name, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"malformed family parameter {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigurationError(f"non-numeric value in {item!r}") from None
    if name.strip() not in FAMILIES:
        raise ConfigurationError(f"unknown family {name!r}")
    return name.strip(), params
