"""Decision trees over {-1,1}^n with real leaves."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .cube import DenseFunction, DimensionError, SparsePoly, all_points, check_mask, coordinate_bits


@dataclass(frozen=True)
class Leaf:
    value: float


@dataclass(frozen=True)
class Node:
    """Internal node querying ``x_var``; ``neg`` is followed when x_var = -1."""

    var: int
    neg: "DecisionTree"
    pos: "DecisionTree"


DecisionTree = Union[Leaf, Node]


def is_tree(obj) -> bool:
    return isinstance(obj, (Leaf, Node))


def validate_tree(T: DecisionTree, n: int) -> None:
    """Raise if a label is out of range or repeats on a root-to-leaf path."""

    def walk(node, seen):
        if isinstance(node, Leaf):
            return
        if not 1 <= node.var <= n:
            raise DimensionError(f"variable x_{node.var} out of range for n={n}")
        if node.var in seen:
            raise ValueError(f"variable x_{node.var} repeats on a root-to-leaf path")
        seen = seen | {node.var}
        walk(node.neg, seen)
        walk(node.pos, seen)

    walk(T, frozenset())


def depth(T: DecisionTree) -> int:
    if isinstance(T, Leaf):
        return 0
    return 1 + max(depth(T.neg), depth(T.pos))


def variables(T: DecisionTree) -> set[int]:
    if isinstance(T, Leaf):
        return set()
    return {T.var} | variables(T.neg) | variables(T.pos)


def tree_eval(T: DecisionTree, x: int, n: int) -> float:
    """Follow x from the root and return the leaf label."""
    check_mask(x, n)
    node = T
    while isinstance(node, Node):
        if node.var > n:
            raise DimensionError(f"variable x_{node.var} out of range for n={n}")
        node = node.neg if (x >> (node.var - 1)) & 1 else node.pos
    return float(node.value)


def tree_evaluate(T: DecisionTree, points: np.ndarray) -> np.ndarray:
    """Vectorized evaluation on a ``(Q, words(n))`` point array."""
    out = np.empty(points.shape[0])
    idx = np.arange(points.shape[0])

    def walk(node, rows):
        if rows.size == 0:
            return
        if isinstance(node, Leaf):
            out[rows] = node.value
            return
        bit = coordinate_bits(points[rows], node.var).astype(bool)
        walk(node.neg, rows[bit])
        walk(node.pos, rows[~bit])

    walk(T, idx)
    return out


def tree_to_poly(T: DecisionTree, n: int | None = None) -> SparsePoly:
    """Exact Fourier expansion.

    At a node on x_i the function is (f_pos + f_neg)/2 + x_i (f_pos - f_neg)/2,
    and x_i never occurs in either subtree, so multiplying by x_i only sets
    bit i-1 of every key.
    """

    def expand(node) -> dict[int, float]:
        if isinstance(node, Leaf):
            return {0: float(node.value)}
        neg, pos = expand(node.neg), expand(node.pos)
        bit = 1 << (node.var - 1)
        acc: dict[int, float] = {}
        for S in neg.keys() | pos.keys():
            a, b = pos.get(S, 0.0), neg.get(S, 0.0)
            acc[S] = acc.get(S, 0.0) + 0.5 * (a + b)
            acc[S | bit] = acc.get(S | bit, 0.0) + 0.5 * (a - b)
        return acc

    if n is None:
        n = max(variables(T), default=1)
    return SparsePoly(n, expand(T))


def densify_tree(T: DecisionTree, n: int) -> DenseFunction:
    validate_tree(T, n)
    return DenseFunction(n, tree_evaluate(T, all_points(n)))


def relabel(T: DecisionTree, mapping: Mapping[int, int]) -> DecisionTree:
    if isinstance(T, Leaf):
        return T
    return Node(mapping[T.var], relabel(T.neg, mapping), relabel(T.pos, mapping))


def tree_to_json(T: DecisionTree) -> dict:
    if isinstance(T, Leaf):
        return {"leaf": T.value}
    return {"var": T.var, "neg": tree_to_json(T.neg), "pos": tree_to_json(T.pos)}


def tree_from_json(data: Mapping) -> DecisionTree:
    if "leaf" in data:
        return Leaf(float(data["leaf"]))
    return Node(int(data["var"]), tree_from_json(data["neg"]), tree_from_json(data["pos"]))
