"""Losses (sorted l1, 1-d Wasserstein), a brute-force matching oracle and
Monte Carlo risk aggregation."""

from __future__ import annotations

import csv
import io
import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .exceptions import ConfigurationError
from .measures import DiscreteDistribution, GridMeasure
from .sampling import CountVector, draw_multinomial, draw_poissonized, trial_rng


def sorted_l1(P, Q) -> float:
    """``sum |p_(i) - q_(i)|`` after zero-padding the shorter vector and sorting."""
    p = np.asarray(P, dtype=float).ravel()
    q = np.asarray(Q, dtype=float).ravel()
    size = max(p.size, q.size)
    p = np.sort(np.concatenate([np.zeros(size - p.size), p]))
    q = np.sort(np.concatenate([np.zeros(size - q.size), q]))
    return float(np.abs(p - q).sum())


def wasserstein_1d(mu: GridMeasure, nu: GridMeasure, mass_tol: float = 1e-9) -> float:
    """W1 between two measures of equal mass, normalised to probabilities.

    Integrates ``|F_mu^-1(t) - F_nu^-1(t)|`` exactly over the merged
    breakpoints of the two step quantile functions.
    """
    a, b = mu.total_mass, nu.total_mass
    if a <= 0 or b <= 0:
        raise ConfigurationError("measures must have positive mass")
    if abs(a - b) > mass_tol * max(1.0, a, b):
        raise ConfigurationError(f"mass mismatch: {a} vs {b}")
    cu = np.cumsum(mu.masses) / a
    cv = np.cumsum(nu.masses) / b
    cu[-1] = cv[-1] = 1.0
    levels = np.union1d(cu, cv)
    lefts = np.concatenate([[0.0], levels[:-1]])
    widths = levels - lefts
    keep = widths > 0
    lefts, widths = lefts[keep], widths[keep]
    iu = np.minimum(np.searchsorted(cu, lefts, side="right"), cu.size - 1)
    iv = np.minimum(np.searchsorted(cv, lefts, side="right"), cv.size - 1)
    return float(np.sum(widths * np.abs(mu.points[iu] - nu.points[iv])))


def vector_measure(values) -> GridMeasure:
    """``mu_P``: equal weight ``1/S`` on each entry of ``values``."""
    v = np.asarray(values, dtype=float)
    return GridMeasure.from_atoms(v, np.full(v.size, 1.0 / v.size))


def matching_oracle(P, Q) -> float:
    """Minimum over permutations of ``sum |p_i - q_sigma(i)|`` (exhaustive)."""
    p = np.asarray(P, dtype=float)
    q = np.asarray(Q, dtype=float)
    if p.size != q.size:
        raise ConfigurationError("vectors must have equal length")
    if p.size > 8:
        raise ConfigurationError("oracle is limited to length <= 8")
    best = np.inf
    for perm in itertools.permutations(range(q.size)):
        best = min(best, float(np.abs(p - q[list(perm)]).sum()))
    return best


@dataclass
class RiskReport:
    estimator: str
    family: str
    params: dict
    S: int
    n: float
    trials: int
    model: str
    seed: int
    losses: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.losses))

    @property
    def stderr(self) -> float:
        if len(self.losses) < 2:
            return 0.0
        return float(np.std(self.losses, ddof=1) / np.sqrt(len(self.losses)))

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("losses")
        d["mean_loss"] = self.mean
        d["stderr"] = self.stderr
        return d

    def to_json(self) -> str:
        d = self.summary()
        d["losses"] = list(self.losses)
        return json.dumps(d, indent=2, sort_keys=True)


CSV_FIELDS = ("estimator", "family", "S", "n", "model", "seed", "trial", "loss")


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for r in reports:
        for t, loss in enumerate(r.losses):
            writer.writerow([r.estimator, r.family, r.S, r.n, r.model, r.seed, t, repr(float(loss))])
    return buf.getvalue()


def draw(dist: DiscreteDistribution, n: float, model: str, rng) -> CountVector:
    if model == "poissonized":
        return draw_poissonized(dist, n, rng)
    if model == "multinomial":
        return draw_multinomial(dist, int(n), rng)
    raise ConfigurationError(f"unknown sampling model {model!r}")


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("LMM_THREADS", "1")))
    except ValueError:
        return 1


def monte_carlo_risk(
    dist: DiscreteDistribution,
    estimator: Callable[[CountVector, np.random.Generator], np.ndarray],
    n: float,
    trials: int,
    seed: int,
    model: str = "poissonized",
    name: str = "estimator",
    family: str = "custom",
    params: dict | None = None,
    config: dict | None = None,
) -> RiskReport:
    """Average sorted-l1 loss of ``estimator`` over seeded trials.

    Trial ``t`` uses the stream derived from ``(seed, t)`` for both sampling
    and the estimator's internal randomness, so results do not depend on the
    order or the number of workers.
    """
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    truth = np.sort(dist.probs)

    def one(t):
        rng = trial_rng(seed, t)
        counts = draw(dist, n, model, rng)
        return sorted_l1(estimator(counts, rng), truth)

    workers = worker_count()
    if workers == 1:
        losses = [one(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            losses = list(pool.map(one, range(trials)))
    return RiskReport(
        estimator=name,
        family=family,
        params=dict(params or {}),
        S=dist.S,
        n=n,
        trials=trials,
        model=model,
        seed=seed,
        losses=losses,
        config=dict(config or {}),
    )
