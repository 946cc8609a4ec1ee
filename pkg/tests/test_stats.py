import math

import numpy as np
import pytest
from hypothesis import given, settings

from causalscope import (
    DiscreteDist,
    TestParams,
    bhattacharyya,
    hellinger_two_sample_test,
    learn_empirical,
    learn_sample_size,
    sample_size_for_test,
    squared_hellinger,
    tv_distance,
)
from causalscope.errors import BudgetMismatch, InsufficientSamples, SupportMismatch

from conftest import prob_vector_pairs


def dist(probs, K=2):
    probs = np.asarray(probs, dtype=float)
    width = round(math.log(probs.size, K))
    return DiscreteDist(tuple(range(width)), probs, K)


class TestDistances:
    def test_tv_identical(self):
        d = dist([0.5, 0.5])
        assert tv_distance(d, d) == 0.0

    def test_tv_disjoint_point_masses(self):
        assert tv_distance(dist([1.0, 0.0]), dist([0.0, 1.0])) == 1.0

    def test_tv_hand_value(self):
        assert tv_distance(dist([0.5, 0.5]), dist([0.75, 0.25])) == pytest.approx(0.25)

    def test_h2_identical(self):
        d = dist([0.3, 0.7])
        assert squared_hellinger(d, d) == pytest.approx(0.0, abs=1e-15)

    def test_h2_disjoint(self):
        assert squared_hellinger(dist([1.0, 0.0]), dist([0.0, 1.0])) == 1.0

    def test_h2_hand_value(self):
        got = squared_hellinger(dist([0.5, 0.5]), dist([1.0, 0.0]))
        assert got == pytest.approx(1 - math.sqrt(0.5), abs=1e-12)

    def test_bhattacharyya_complements_h2(self):
        p, q = dist([0.2, 0.8]), dist([0.6, 0.4])
        assert bhattacharyya(p, q) + squared_hellinger(p, q) == pytest.approx(1.0)

    def test_support_mismatch(self):
        with pytest.raises(SupportMismatch):
            tv_distance(DiscreteDist((0,), np.array([1.0, 0.0]), 2),
                        DiscreteDist((1,), np.array([1.0, 0.0]), 2))

    @given(prob_vector_pairs())
    @settings(max_examples=200, deadline=None)
    def test_sandwich_and_symmetry(self, pq):
        p, q = pq
        P = DiscreteDist((0,), p, len(p))
        Q = DiscreteDist((0,), q, len(q))
        h2, tv = squared_hellinger(P, Q), tv_distance(P, Q)
        assert h2 <= tv + 1e-12
        assert tv <= math.sqrt(2 * h2) + 1e-12
        assert tv == pytest.approx(tv_distance(Q, P), abs=1e-15)
        assert h2 == pytest.approx(squared_hellinger(Q, P), abs=1e-15)


class TestSampleSize:
    def test_hand_value(self):
        # D=4, eps2=.25, delta=1: min(16, 11.3137) * 5, log term clamped to 0
        assert sample_size_for_test(4, 0.25, 1.0, 5.0) == 57

    def test_monotone_in_domain(self):
        sizes = [sample_size_for_test(d, 0.1, 0.1) for d in (2, 4, 8, 16, 64)]
        assert sizes == sorted(sizes)

    def test_delta_growth_bounded(self):
        base = sample_size_for_test(8, 0.1, 0.2)
        halved = sample_size_for_test(8, 0.1, 0.1)
        assert base <= halved <= math.ceil(base * (1 + math.log(20)) / (1 + math.log(5))) + 1

    def test_rejects_nonpositive(self):
        with pytest.raises(BudgetMismatch):
            sample_size_for_test(0, 0.1, 0.1)


class TestHellingerTest:
    def params(self, m, eps2=0.25, delta=0.1):
        return TestParams(eps2, delta, m)

    def test_identical_multisets_equal(self):
        sa = np.array([0, 1, 2, 3] * 25)
        v = hellinger_two_sample_test(sa, sa.copy(), 4, self.params(100), seed=0)
        assert v.decision == "equal"
        assert v.statistic <= 0

    def test_disjoint_point_masses_far(self):
        m = 100
        v = hellinger_two_sample_test(np.zeros(m, int), np.ones(m, int), 2,
                                      self.params(m), seed=1)
        assert v.decision == "far"
        assert v.statistic == pytest.approx(2 * (m - 1))

    def test_budget_mismatch(self):
        with pytest.raises(BudgetMismatch):
            hellinger_two_sample_test(np.zeros(5, int), np.zeros(6, int), 2,
                                      self.params(5), seed=0)

    def test_verdict_consistent_with_threshold(self):
        rng = np.random.default_rng(7)
        m = 200
        v = hellinger_two_sample_test(rng.integers(0, 4, m), rng.integers(0, 4, m),
                                      4, self.params(m), seed=3)
        assert (v.decision == "far") == (v.statistic > v.threshold)

    def test_null_false_far_rate(self):
        # uniform P = Q over D=4, budget straight from the size formula
        delta, trials = 0.1, 200
        m = sample_size_for_test(4, 0.25, delta)
        params = TestParams(0.25, delta, m)
        rng = np.random.default_rng(42)
        fars = 0
        for t in range(trials):
            sa = rng.integers(0, 4, m)
            sb = rng.integers(0, 4, m)
            v = hellinger_two_sample_test(sa, sb, 4, params, seed=t)
            fars += v.decision == "far"
        assert fars / trials <= delta + 3 * math.sqrt(delta / trials)

    def test_power_at_full_separation(self):
        delta, trials = 0.1, 100
        m = sample_size_for_test(2, 0.25, delta)
        params = TestParams(0.25, delta, m)
        rng = np.random.default_rng(43)
        fars = 0
        for t in range(trials):
            sa = np.zeros(m, int)
            sb = np.ones(m, int)
            _ = rng  # fixed disjoint supports; randomness not needed
            v = hellinger_two_sample_test(sa, sb, 2, params, seed=t)
            fars += v.decision == "far"
        assert fars / trials >= 0.99


class TestLearnEmpirical:
    def test_point_mass(self):
        m = learn_sample_size(2, 0.3, 0.3)
        d = learn_empirical(np.zeros(m, int), (0,), 2, 0.3, 0.3)
        np.testing.assert_allclose(d.probs, [1.0, 0.0])

    def test_balanced_counts(self):
        samples = np.array([0, 0, 1, 1] * 30)
        d = learn_empirical(samples, (0,), 2, 0.5, 0.5)
        np.testing.assert_allclose(d.probs, [0.5, 0.5])

    def test_insufficient(self):
        with pytest.raises(InsufficientSamples):
            learn_empirical(np.zeros(3, int), (0,), 2, 0.05, 0.1)

    def test_monte_carlo_tv_guarantee(self):
        eps, delta, trials = 0.05, 0.1, 200
        m = learn_sample_size(2, eps, delta)
        rng = np.random.default_rng(77)
        truth = np.array([0.7, 0.3])
        hits = 0
        for _ in range(trials):
            samples = (rng.random(m) < 0.3).astype(int)
            d = learn_empirical(samples, (0,), 2, eps, delta)
            hits += abs(d.probs - truth).sum() / 2 <= eps
        assert hits / trials >= 1 - delta - 3 * math.sqrt(delta / trials)
