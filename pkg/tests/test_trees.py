"""Decision trees: evaluation, exact expansion, serialization."""
import numpy as np
import pytest

from lowdeg.cube import DimensionError, all_points, wht
from lowdeg.generators import random_tree
from lowdeg.trees import (Leaf, Node, densify_tree, depth, tree_eval, tree_evaluate, tree_from_json,
                          tree_to_json, tree_to_poly, validate_tree, variables)


def dictator(i):
    return Node(i, Leaf(-1.0), Leaf(1.0))


class TestTrees:
    def test_dictator(self):
        T = dictator(2)
        assert tree_eval(T, 0b10, 3) == -1.0
        assert tree_eval(T, 0b01, 3) == 1.0
        assert tree_to_poly(T, 3).coeffs == {0b10: 1.0}

    def test_vectorized_matches_scalar(self):
        T = random_tree(9, 4, seed=3)
        pts = all_points(9)
        vec = tree_evaluate(T, pts)
        assert vec.tolist() == [tree_eval(T, x, 9) for x in range(512)]

    @pytest.mark.parametrize("seed", range(10))
    def test_expansion_matches_transform(self, seed):
        T = random_tree(8, 3, seed)
        assert tree_to_poly(T, 8).coeffs == pytest.approx(wht(densify_tree(T, 8)).coeffs, abs=1e-12)

    def test_depth_and_variables(self):
        T = Node(1, dictator(2), Leaf(0.5))
        assert depth(T) == 2
        assert variables(T) == {1, 2}

    def test_validation(self):
        with pytest.raises(ValueError):
            validate_tree(Node(1, dictator(1), Leaf(0.0)), 3)
        with pytest.raises(DimensionError):
            validate_tree(dictator(4), 3)

    def test_json_round_trip(self):
        T = random_tree(6, 3, seed=11)
        assert tree_from_json(tree_to_json(T)) == T

    def test_real_leaves(self):
        T = Node(1, Leaf(0.25), Leaf(-0.75))
        vals = densify_tree(T, 1).values
        assert np.array_equal(vals, [-0.75, 0.25])
