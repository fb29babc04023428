"""Packing construction, distance identities and packing/covering numbers."""
import itertools
import math

import numpy as np
import pytest

from lowdeg.cube import DenseFunction, SparsePoly, wht
from lowdeg.packing import (ConstructionFailed, distance_matrix, entropy_bounds, entropy_lower,
                            exact_covering_number, exhaustive_pair_distance, family_target,
                            greedy_packing_number, packing_family, sigma_tree, small_intersection_family,
                            tree_pair_distance, verify_packing)
from lowdeg.trees import Leaf, Node, densify_tree, tree_eval

from oracles import max_packing, min_cover


def signed_linear(n: int) -> list[SparsePoly]:
    out = []
    for S in [0] + [1 << i for i in range(n)]:
        out += [SparsePoly(n, {S: 1.0}), SparsePoly(n, {S: -1.0})]
    return out


class TestFamily:
    @pytest.mark.parametrize("m,k,eps,expect", [(10_000, 4, 0.5, 156), (126, 4, 0.25, 22), (50, 1, 0.5, 1)])
    def test_target(self, m, k, eps, expect):
        assert family_target(m, k, eps) == expect

    @pytest.mark.parametrize("seed", range(5))
    def test_intersections(self, seed):
        fam = small_intersection_family(126, 4, 0.25, seed)
        assert len(fam) >= 22
        assert fam.max_intersection() < 0.75 * 4
        assert all(len(set(s)) == 4 and 1 <= min(s) and max(s) <= 126 for s in fam.members)
        assert len(set(fam.members)) == len(fam)

    def test_singletons(self):
        fam = small_intersection_family(20, 1, 0.5, seed=0, target=10)
        assert len(set(fam.members)) == len(fam) >= 10

    def test_unreachable_target(self):
        with pytest.raises(ConstructionFailed) as info:
            small_intersection_family(6, 3, 0.5, seed=0, target=50)
        assert info.value.retries == 64 and info.value.target == 50

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            small_intersection_family(4, 4, 0.5, 0)
        with pytest.raises(ValueError):
            small_intersection_family(10, 2, 1.0, 0)


class TestSigmaTree:
    def test_single_query(self):
        T = sigma_tree([4], 1, 6)
        assert T == Node(4, Leaf(-1.0), Leaf(1.0))

    def test_path_order(self):
        T = sigma_tree([2, 5], 2, 6)
        assert T.var == 1
        assert T.neg.var == 2 and T.pos.var == 5

    def test_boolean_degree_three(self):
        T = sigma_tree([3, 4, 5, 6], 3, 6)
        f = densify_tree(T, 6)
        assert set(np.unique(f.values)) == {-1.0, 1.0}
        assert wht(f).degree() == 3

    def test_outputs_bottom_variable(self):
        sigma = [3, 5, 8, 9]
        T = sigma_tree(sigma, 3, 9)
        for x in range(2 ** 9):
            j = (((x >> 0) & 1) ^ 1) * 2 + (((x >> 1) & 1) ^ 1)
            v = sigma[j]
            assert tree_eval(T, x, 9) == (-1.0 if (x >> (v - 1)) & 1 else 1.0)

    @pytest.mark.parametrize("sigma,d", [([1, 2], 2), ([2, 2], 2), ([5, 3], 2), ([2, 9], 2), ([3, 4, 5], 3)])
    def test_rejects(self, sigma, d):
        with pytest.raises(ValueError):
            sigma_tree(sigma, d, 8)


class TestPairDistance:
    def test_identical(self):
        assert tree_pair_distance([3, 4, 5, 6], [3, 4, 5, 6], 3) == 0.0

    def test_one_position(self):
        assert tree_pair_distance([3, 4, 5, 6], [3, 4, 5, 7], 3) == 0.5
        T1, T2 = sigma_tree([3, 4, 5, 6], 3, 7), sigma_tree([3, 4, 5, 7], 3, 7)
        assert exhaustive_pair_distance(T1, T2) == pytest.approx(0.5, abs=1e-12)
        full = np.mean((densify_tree(T1, 7).values - densify_tree(T2, 7).values) ** 2)
        assert full == pytest.approx(0.5, abs=1e-12)

    def test_disjoint(self):
        assert tree_pair_distance([2, 3], [4, 5], 2) == 2.0

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            tree_pair_distance([2, 3], [2, 3, 4, 5], 2)

    def test_identity_on_random_pairs(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            a, b = (sorted(rng.choice(np.arange(3, 12), 4, replace=False).tolist()) for _ in range(2))
            T1, T2 = sigma_tree(a, 3, 11), sigma_tree(b, 3, 11)
            assert tree_pair_distance(a, b, 3) == pytest.approx(exhaustive_pair_distance(T1, T2), abs=1e-12)
            assert tree_pair_distance(a, b, 3) >= (4 - len(set(a) & set(b))) / 2


class TestPackingFamily:
    def test_d1_singletons(self):
        cert = packing_family(16, 1, 0.5, seed=0)
        assert cert.min_sq_distance == 2.0
        assert all(len(s) == 1 for s in cert.family.members)

    def test_n128(self):
        cert = packing_family(128, 3, 0.25, seed=0, verify="exhaustive")
        assert cert.size >= 22 == cert.size_bound
        assert cert.min_sq_distance >= 1.0
        assert cert.max_identity_gap <= 1e-12
        assert cert.log2_size >= cert.lower_bound

    def test_json_round_trip_reverifies(self):
        cert = packing_family(64, 2, 0.5, seed=3)
        doc = cert.to_json()
        sig = [tuple(s) for s in doc["sigmas"]]
        dmin = min(tree_pair_distance(a, b, 2) for a, b in itertools.combinations(sig, 2))
        assert dmin == doc["min_sq_distance"] >= 2 * doc["eps"]

    def test_rejects_large_d(self):
        with pytest.raises(ValueError):
            packing_family(8, 4, 0.5, 0)


class TestNumbers:
    def test_verify_packing(self):
        assert verify_packing([SparsePoly.walsh(3, 1)], 1.0) == (True, math.inf)
        ok, dmin = verify_packing([SparsePoly.walsh(3, 1), SparsePoly.walsh(3, 6)], 1.0)
        assert ok and dmin == pytest.approx(math.sqrt(2))
        f = SparsePoly.walsh(3, 2)
        assert verify_packing([f, f], 0.0) == (False, 0.0)

    def test_dense_and_sparse_agree(self):
        funcs = signed_linear(3)
        from lowdeg.cube import densify
        D1 = distance_matrix(funcs)
        D2 = distance_matrix([densify(f) for f in funcs])
        assert np.allclose(D1, D2, atol=1e-12)

    def test_signed_walsh(self):
        funcs = signed_linear(3)
        assert greedy_packing_number(funcs, 1.0) == 8
        assert greedy_packing_number(funcs, 1.0, exhaustive=True) == 8

    def test_identical(self):
        f = SparsePoly.walsh(2, 1)
        assert greedy_packing_number([f, f, f], 0.5) == 1

    def test_monotone(self):
        rng = np.random.default_rng(1)
        funcs = [DenseFunction(4, rng.choice([-1.0, 1.0], 16)) for _ in range(12)]
        levels = np.linspace(0.05, 2.0, 40)
        sizes = [greedy_packing_number(funcs, e) for e in levels]
        assert all(a >= b for a, b in zip(sizes, sizes[1:]))

    @pytest.mark.parametrize("seed", range(4))
    def test_against_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        funcs = [DenseFunction(3, rng.choice([-1.0, 1.0], 8)) for _ in range(9)]
        D = distance_matrix(funcs)
        for eps in (0.5, 1.0, 1.5):
            assert greedy_packing_number(funcs, eps, exhaustive=True) == max_packing(D, eps)
            assert greedy_packing_number(funcs, eps) <= max_packing(D, eps)
            assert exact_covering_number(funcs, eps) == min_cover(D, eps)

    @pytest.mark.parametrize("eps", [0.5, 1.0, 1.5])
    def test_sandwich(self, eps):
        funcs = signed_linear(3)
        M2 = greedy_packing_number(funcs, 2 * eps, exhaustive=True)
        N = exact_covering_number(funcs, eps)
        M = greedy_packing_number(funcs, eps)
        assert M >= N >= M2


class TestEntropyBounds:
    def test_lower_limit(self):
        assert entropy_lower(1024, 2, 1.0) == -3.0

    def test_walsh_count(self):
        assert entropy_bounds(1024, 2, 0.5, 1.0, 0.0).walsh_lb == pytest.approx(19.001, abs=1e-3)

    def test_lower_value(self):
        assert entropy_bounds(2 ** 20, 3, 0.5, 1.0, 0.0).lower == pytest.approx(12.0)

    def test_upper(self):
        b = entropy_bounds(1024, 2, 0.5, 1.0, 3.0)
        assert b.upper == pytest.approx(4 / 0.0625 * math.log(1024) + 3.0)
