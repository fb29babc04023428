"""Counted evaluation access to an unknown function."""
from __future__ import annotations

import numpy as np

from .cube import DenseFunction, SparsePoly, check_mask, points_array, poly_eval
from .trees import is_tree, tree_eval, tree_evaluate


def evaluate_points(target, points: np.ndarray, n: int) -> np.ndarray:
    """Evaluate a target at every row of a ``(Q, words(n))`` point array.

    ``target`` may be a SparsePoly, DenseFunction, decision tree, or any
    callable taking a point mask.
    """
    if isinstance(target, (SparsePoly, DenseFunction)):
        return target.evaluate(points)
    if is_tree(target):
        return tree_evaluate(target, points)
    from .cube import points_list

    return np.array([float(target(x)) for x in points_list(points)])


def evaluate_point(target, x: int, n: int) -> float:
    if isinstance(target, SparsePoly):
        return poly_eval(target, x)
    if isinstance(target, DenseFunction):
        return target(x)
    if is_tree(target):
        return tree_eval(target, x, n)
    return float(target(x))


class QueryOracle:
    """Evaluation access with a monotone query counter.

    With ``distinct=True`` each point is charged once and later requests are
    served from a cache; otherwise every evaluation is charged.  ``peek``
    evaluates without charging and is reserved for post-hoc verification.
    """

    def __init__(self, target, n: int, distinct: bool = False):
        self.target = target
        self.n = n
        self.distinct = distinct
        self.count = 0
        self._cache: dict[int, float] = {}

    @property
    def accounting(self) -> str:
        return "distinct" if self.distinct else "every"

    def query(self, x: int) -> float:
        check_mask(x, self.n)
        if self.distinct:
            if x not in self._cache:
                self._cache[x] = evaluate_point(self.target, x, self.n)
                self.count += 1
            return self._cache[x]
        self.count += 1
        return evaluate_point(self.target, x, self.n)

    __call__ = query

    def query_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate every row of a point array, charging per the accounting mode."""
        if self.distinct:
            from .cube import points_list

            return np.array([self.query(x) for x in points_list(points)])
        self.count += points.shape[0]
        return evaluate_points(self.target, points, self.n)

    def query_many(self, xs) -> np.ndarray:
        return self.query_batch(points_array(xs, self.n))

    def peek(self, x: int) -> float:
        return evaluate_point(self.target, x, self.n)
