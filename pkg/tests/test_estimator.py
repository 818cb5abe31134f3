import math

import numpy as np
import pytest

from lmm import (
    ConfigurationError,
    CountVector,
    DiscreteDistribution,
    GridMeasure,
    LmmConfig,
    discretize_to_vector,
    draw_poissonized,
    lmm_estimate,
    lmm_measure,
    make_distribution,
    sorted_l1,
    split_counts,
    trial_rng,
    vector_measure,
    wasserstein_1d,
)
from lmm.estimator import fallback_measure, truth_feasibility


class TestConfig:
    def test_defaults_recorded(self):
        d = LmmConfig().to_dict()
        assert set(d) >= {"c1", "c2", "c3", "theory_mode", "grid_factor", "min_moments", "support_size", "seed"}

    @pytest.mark.parametrize(
        "kw",
        [
            {"c1": 0},
            {"c3": -1},
            {"grid_factor": 0},
            {"min_moments": 0},
            {"support_size": 0},
            {"support_lower": 2.0},
            {"theory_mode": True},
            {"theory_mode": True, "c1": 2, "c2": 1.5, "c3": 100},
        ],
    )
    def test_rejects(self, kw):
        with pytest.raises(ConfigurationError):
            LmmConfig(**kw)

    def test_theory_preset(self):
        cfg = LmmConfig.theory()
        assert cfg.theory_mode and cfg.c1 > 2 * cfg.c2 and cfg.c3 > 30 * cfg.c1


class TestDiscretizeToVector:
    def test_point_mass(self):
        m = GridMeasure(np.array([0.5]), np.array([2.0]))
        for seed in range(5):
            assert discretize_to_vector(m, np.random.default_rng(seed)).values.tolist() == [0.5, 0.5]

    def test_fix_up_at_zero(self):
        m = GridMeasure(np.array([0.4]), np.array([1.5]))
        v = discretize_to_vector(m, np.random.default_rng(0)).values
        assert len(v) == 2 and v[1] == 0.4 and v[0] in (0.0, 0.4)

    def test_unit_atoms_reproduced_exactly(self):
        values = np.array([0.01, 0.02, 0.02, 0.3, 0.65])
        v = discretize_to_vector(GridMeasure.from_atoms(values), np.random.default_rng(1)).values
        np.testing.assert_array_equal(v, values)

    def test_empty_measure(self):
        assert discretize_to_vector(GridMeasure.empty(), np.random.default_rng(0)).values.tolist() == [0.0]

    def test_sum_close_to_mass_over_grid(self):
        grid = np.linspace(0, 0.01, 101)
        w = np.random.default_rng(2).random(101)
        m = GridMeasure(grid, w * (100 / w.sum()))
        v = discretize_to_vector(m, np.random.default_rng(3)).values
        assert len(v) == 100
        assert abs(v.sum() - m.moment(1)) <= 2 * (grid[1] - grid[0]) * 100


class TestPipeline:
    def test_degenerate_distribution(self):
        dist = DiscreteDistribution([1.0])
        counts = draw_poissonized(dist, 5000, trial_rng(0, 0))
        measure, diag = lmm_measure(counts, LmmConfig(), trial_rng(0, 1))
        assert abs(measure.total_mass - 1) < 0.1
        mean = measure.moment(1) / measure.total_mass
        assert abs(mean - 1) < 3 * math.sqrt(math.log(2500) / 2500)

    def test_all_zero_counts(self):
        counts = CountVector(np.zeros(10, dtype=int), 10.0)
        measure, diag = lmm_measure(counts, LmmConfig(), np.random.default_rng(0))
        assert not diag.fallback
        assert measure.total_mass == 0
        est, _ = lmm_estimate(counts, LmmConfig(), np.random.default_rng(0))
        assert est.values.tolist() == [0.0]

    def test_rate_too_small(self):
        with pytest.raises(ConfigurationError):
            lmm_measure(CountVector(np.array([1, 2]), 3.0), LmmConfig(), np.random.default_rng(0))

    def test_uniform_mostly_without_fallback(self):
        dist = make_distribution("uniform", 1000)
        fallbacks = 0
        for t in range(20):
            rng = trial_rng(11, t)
            _, diag = lmm_measure(draw_poissonized(dist, 2000, rng), LmmConfig(), rng)
            fallbacks += diag.fallback
            assert diag.fallback == any(s != "feasible" for s in diag.interval_status.values())
        assert fallbacks < 10

    def test_estimate_sorted_and_l1_matches_w1(self):
        dist = make_distribution("zipf", 300, s=0.8)
        rng = trial_rng(3, 0)
        counts = draw_poissonized(dist, 3000, rng)
        est, diag = lmm_estimate(counts, LmmConfig(), rng)
        assert np.all(np.diff(est.values) >= 0)
        assert len(est) == max(1, math.ceil(diag.total_mass - 1e-9))
        S = max(len(est), dist.S)
        P, Q = np.sort(dist.probs), est.padded(S)
        P = np.concatenate([np.zeros(S - P.size), P])
        assert sorted_l1(Q, P) == pytest.approx(S * wasserstein_1d(vector_measure(P), vector_measure(Q)), abs=1e-9)

    def test_fallback_returns_second_half_empirical(self):
        dist = make_distribution("zipf", 300, s=1.0)
        counts = draw_poissonized(dist, 3000, trial_rng(5, 0))
        # a vanishing tolerance makes some fixed-mass interval infeasible
        cfg = LmmConfig(c3=1e-9)
        rng = np.random.default_rng(9)
        est, diag = lmm_estimate(counts, cfg, rng)
        assert diag.fallback
        second = split_counts(counts, np.random.default_rng(9)).second
        np.testing.assert_allclose(est.values, np.sort(second.counts / second.rate))

    def test_fallback_measure_helper(self):
        m = fallback_measure(np.array([0.1, 0.1, 1.5]))
        assert m.points.tolist() == [0.1, 1.0] and m.masses.tolist() == [2.0, 1.0]

    def test_supplied_support_size_bounds_length(self):
        dist = make_distribution("uniform", 300)
        cfg = LmmConfig.theory(support_size=300)
        for t in range(3):
            rng = trial_rng(4, t)
            est, diag = lmm_estimate(draw_poissonized(dist, 1500, rng), cfg, rng)
            if not diag.fallback:
                assert len(est) <= 300

    def test_deterministic(self):
        dist = make_distribution("two_level", 500, fraction=0.1, ratio=5)
        counts = draw_poissonized(dist, 2000, trial_rng(0, 0))
        a, da = lmm_estimate(counts, LmmConfig(), trial_rng(8, 8))
        b, db = lmm_estimate(counts, LmmConfig(), trial_rng(8, 8))
        np.testing.assert_array_equal(a.values, b.values)
        assert da.interval_status == db.interval_status

    def test_diagnostics_dict(self):
        counts = draw_poissonized(make_distribution("uniform", 100), 500, trial_rng(0, 0))
        _, diag = lmm_estimate(counts, LmmConfig(), trial_rng(0, 1))
        d = diag.to_dict()
        assert d["n_half"] == 250 and d["K"] >= 2 and set(d["interval_status"]) == set(d["S_j"])


def test_truth_feasibility_theory_mode():
    dist = make_distribution("uniform", 200)
    rng = trial_rng(2, 0)
    status = truth_feasibility(draw_poissonized(dist, 1000, rng), dist.probs, LmmConfig.theory(), rng)
    assert status and all(status.values())
