"""Random-example learners: sample counts, selection, guarantees."""
import math

import numpy as np
import pytest

from lowdeg import _rng
from lowdeg.cube import DenseFunction, SparsePoly, mask_from_vars, sq_distance, wht
from lowdeg.generators import random_bounded_poly, random_tree
from lowdeg.learners import (ThresholdConfig, abort_cap, binomial_sum, estimate_spectrum, event_holds,
                             learn_lowdegree_lmn, learn_sparse, lmn_samples, required_samples,
                             threshold_select)
from lowdeg.oracle import QueryOracle
from lowdeg.trees import tree_to_poly

from oracles import walsh_table


class TestSampleCounts:
    def test_reference_values(self):
        assert required_samples(0.1, 10, 2, 0.1) == 1405
        assert lmn_samples(10, 1, 0.5, 0.5) == 148

    def test_minimum_one(self):
        assert required_samples(math.sqrt(2), 1, 0, 2 / math.e) == 1

    def test_monotone_in_n(self):
        counts = [required_samples(0.05, n, 2, 0.1) for n in (8, 64, 512, 4096)]
        assert counts == sorted(counts)

    def test_overflow_guard(self):
        with pytest.raises(OverflowError):
            required_samples(1e-7, 10**6, 3, 0.01)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            required_samples(0.0, 10, 2, 0.1)
        with pytest.raises(ValueError):
            required_samples(0.1, 10, 2, 1.0)

    def test_default_threshold(self):
        cfg = ThresholdConfig(n=64, d=2, m=1, eps=0.1, delta=0.1)
        assert cfg.threshold == pytest.approx(math.sqrt(0.1 / 9))
        assert required_samples(cfg.threshold, 64, 2, 0.1) == 1915

    def test_binomial_sum(self):
        assert binomial_sum(5, 2) == 16
        assert binomial_sum(4, 10) == 16


class TestEstimation:
    def test_alphas_match_empirical_definition(self):
        n, q = 6, 50
        f = random_bounded_poly(n, 3, 5, seed=2)
        oracle = QueryOracle(f, n)
        pts = _rng.uniform_points(_rng.generator(0, _rng.SAMPLES), q, n)
        alpha = estimate_spectrum(oracle, pts, d=6)
        idx = pts[:, 0].astype(int)
        W = walsh_table(n)[idx]
        ref = W.T @ f.evaluate(pts) / q
        assert oracle.count == q
        assert len(alpha) == 64
        assert all(alpha[S] == pytest.approx(ref[S], abs=1e-12) for S in range(64))

    def test_boolean_and_real_paths_agree(self):
        n, q = 12, 300
        T = random_tree(n, 3, seed=4)
        pts = _rng.uniform_points(_rng.generator(1, _rng.SAMPLES), q, n)
        bool_alpha = estimate_spectrum(QueryOracle(T, n), pts, 2)
        real_alpha = estimate_spectrum(QueryOracle(T, n), pts, 2, family=list(bool_alpha))
        assert bool_alpha == pytest.approx(real_alpha, abs=1e-12)

    def test_threshold_select(self):
        assert threshold_select({1: 0.5, 2: -0.21, 3: 0.19}, 0.1) == {1, 2}


class TestSparseLearner:
    def test_walsh_target_exact(self):
        f = SparsePoly.walsh(64, mask_from_vars([1, 2]))
        oracle = QueryOracle(f, 64)
        report = learn_sparse(oracle, ThresholdConfig(64, 2, 1, 0.1, 0.1), seed=1)
        assert report.selected == {mask_from_vars([1, 2])}
        assert report.queries_used == 1915 == oracle.count
        assert sq_distance(report.hypothesis, f) < 0.1

    def test_deterministic(self):
        f = SparsePoly.walsh(64, 5)
        cfg = ThresholdConfig(64, 2, 1, 0.1, 0.1)
        a = learn_sparse(QueryOracle(f, 64), cfg, seed=9, num_samples=300)
        b = learn_sparse(QueryOracle(f, 64), cfg, seed=9, num_samples=300)
        assert a.to_json() == b.to_json()

    def test_family_restriction(self):
        f = SparsePoly.from_terms(16, [([3], 0.6), ([5, 6], 0.4)])
        fam = {mask_from_vars([3]), mask_from_vars([5, 6]), mask_from_vars([1])}
        cfg = ThresholdConfig(16, 2, 3, 0.1, 0.1, family=fam)
        report = learn_sparse(QueryOracle(f, 16), cfg, seed=0)
        assert report.selected <= fam
        assert sq_distance(report.hypothesis, f) <= 0.1

    def test_error_bound_on_good_event(self):
        """Whenever every estimate is within b, the error is at most 9 b^2 m."""
        n, d = 10, 2
        for seed in range(30):
            T = random_tree(n, 2, seed)
            truth = tree_to_poly(T, n)
            m = binomial_sum(3, 2)
            cfg = ThresholdConfig(n, d, m, 0.3, 0.2)
            q = 400
            report = learn_sparse(QueryOracle(T, n), cfg, seed, num_samples=q)
            pts = _rng.uniform_points(_rng.generator(seed, _rng.SAMPLES), q, n)
            alpha = estimate_spectrum(QueryOracle(T, n), pts, d)
            if event_holds(alpha, truth, cfg.threshold):
                assert sq_distance(report.hypothesis, truth) <= 9 * cfg.threshold**2 * m + 1e-12

    def test_abort_is_sound(self):
        """Every aborted run would indeed have exceeded its budget."""
        n, q, budget = 40, 20, 0.1
        f = SparsePoly.walsh(n, 1)
        cfg = ThresholdConfig(n, 2, 1, budget, 0.1)
        aborts = 0
        for seed in range(10):
            short = learn_sparse(QueryOracle(f, n), cfg, seed, num_samples=q, abort_budget=budget)
            full = learn_sparse(QueryOracle(f, n), cfg, seed, num_samples=q)
            if short.aborted:
                aborts += 1
                assert len(full.selected) >= abort_cap(cfg.threshold, budget)
                assert sq_distance(full.hypothesis, f) > budget
        assert aborts > 0

    def test_config_validation(self):
        with pytest.raises(ValueError):
            ThresholdConfig(4, 5, 1, 0.1, 0.1)
        with pytest.raises(ValueError):
            ThresholdConfig(4, 2, 0, 0.1, 0.1)


class TestLowDegree:
    def test_recovers_small_function(self):
        n = 6
        f = random_bounded_poly(n, 2, 4, seed=5)
        report = learn_lowdegree_lmn(QueryOracle(f, n), n, 2, 0.2, 0.1, seed=0)
        assert report.queries_used == lmn_samples(n, 2, 0.2, 0.1)
        assert len(report.selected) == binomial_sum(n, 2)
        assert sq_distance(report.hypothesis, f) <= 0.2

    def test_dense_target(self):
        n = 5
        vals = np.random.default_rng(0).uniform(-1, 1, 32)
        f = DenseFunction(n, vals)
        report = learn_lowdegree_lmn(QueryOracle(f, n), n, 5, 0.5, 0.5, seed=1, num_samples=4000)
        assert sq_distance(report.hypothesis, wht(f)) < 0.05
