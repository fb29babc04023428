"""Slow, definition-level reference implementations used as test oracles.

These deliberately avoid the package's bit tricks: points are explicit sign
tuples and Walsh functions are explicit products.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def sign_vectors(n: int) -> np.ndarray:
    """Row r holds the point with x_i = -1 exactly when bit i-1 of r is set."""
    r = np.arange(2 ** n)[:, None]
    bits = (r >> np.arange(n)[None, :]) & 1
    return 1 - 2 * bits


def subsets(n: int, max_size: int | None = None):
    top = n if max_size is None else max_size
    for k in range(top + 1):
        yield from itertools.combinations(range(1, n + 1), k)


def walsh_table(n: int) -> np.ndarray:
    """W[r, S] = prod_{i in S} x_i(r) with S indexed by its mask."""
    X = sign_vectors(n)
    W = np.ones((2 ** n, 2 ** n))
    for S in range(2 ** n):
        for i in range(n):
            if (S >> i) & 1:
                W[:, S] *= X[:, i]
    return W


def fourier_by_definition(values: np.ndarray, n: int) -> np.ndarray:
    """hat f(S) = E[f w_S] for every mask S."""
    return walsh_table(n).T @ values / 2 ** n


def eval_terms(terms: dict, x_signs) -> float:
    """sum_S c_S prod_{i in S} x_i with S given as a tuple of 1-based variables."""
    return float(sum(c * math.prod(x_signs[i - 1] for i in S) for S, c in terms.items()))


def exact_rank(rows: list[list[int]]) -> int:
    """Rank over the rationals by plain Gaussian elimination on Fractions."""
    M = [[Fraction(v) for v in r] for r in rows]
    rank, cols = 0, len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][c] != 0:
                f = M[i][c] / M[rank][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def max_packing(D: np.ndarray, eps: float) -> int:
    """Largest index set with pairwise distance > eps, by trying every subset."""
    p = D.shape[0]
    for size in range(p, 0, -1):
        for combo in itertools.combinations(range(p), size):
            if all(D[i, j] > eps for i, j in itertools.combinations(combo, 2)):
                return size
    return 0


def min_cover(D: np.ndarray, eps: float) -> int:
    """Fewest centers from the list whose closed eps-balls cover it, by trying every subset."""
    p = D.shape[0]
    for size in range(1, p + 1):
        for combo in itertools.combinations(range(p), size):
            if all(any(D[i, c] <= eps for c in combo) for i in range(p)):
                return size
    return p
