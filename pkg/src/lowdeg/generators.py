"""Seeded random members of the low-degree, Boolean and junta classes."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import _rng
from .cube import SparsePoly
from .learners import binomial_sum
from .trees import DecisionTree, Leaf, Node

KINDS = ("tree", "sparse_poly", "walsh", "junta")


def random_tree(n: int, d: int, seed: int) -> DecisionTree:
    """Complete depth-d tree; each path queries distinct uniform variables; leaves are uniform +/-1."""
    if not 1 <= d <= n:
        raise ValueError("need 1 <= d <= n")
    rng = _rng.generator(seed, _rng.TARGET)

    def build(level: int, used: tuple[int, ...]) -> DecisionTree:
        if level == d:
            return Leaf(float(rng.choice((-1.0, 1.0))))
        while True:
            v = int(rng.integers(1, n + 1))
            if v not in used:
                break
        return Node(v, build(level + 1, used + (v,)), build(level + 1, used + (v,)))

    return build(0, ())


def _random_subsets(rng: np.random.Generator, n: int, d: int, count: int) -> list[int]:
    """``count`` distinct uniform subsets of {1..n} with at most d elements."""
    total = binomial_sum(n, d)
    if count > total:
        raise ValueError(f"only {total} subsets of size <= {d} exist")
    if 2 * count > total:
        from itertools import combinations

        every = [sum(1 << i for i in c) for r in range(d + 1) for c in combinations(range(n), r)]
        return [every[i] for i in sorted(rng.choice(total, size=count, replace=False))]
    sizes = np.array([math.comb(n, r) for r in range(d + 1)], dtype=float)
    probs = sizes / sizes.sum()
    chosen: dict[int, None] = {}
    while len(chosen) < count:
        r = int(rng.choice(d + 1, p=probs))
        S = 0
        for i in rng.choice(n, size=r, replace=False):
            S |= 1 << int(i)
        chosen.setdefault(S, None)
    return list(chosen)


def random_bounded_poly(n: int, d: int, sparsity: int, seed: int) -> SparsePoly:
    """``sparsity`` uniform terms of degree <= d, coefficients U[-1,1] scaled by 1/max(1, sum |c|)."""
    if sparsity < 1:
        raise ValueError("sparsity must be at least 1")
    rng = _rng.generator(seed, _rng.TARGET)
    masks = _random_subsets(rng, n, d, sparsity)
    coeffs = rng.uniform(-1.0, 1.0, size=sparsity)
    coeffs /= max(1.0, float(np.abs(coeffs).sum()))
    return SparsePoly(n, dict(zip(masks, coeffs.tolist())))


def random_walsh(n: int, d: int, seed: int) -> SparsePoly:
    """w_S for a uniform S with exactly d elements."""
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")
    rng = _rng.generator(seed, _rng.TARGET)
    S = 0
    for i in rng.choice(n, size=d, replace=False):
        S |= 1 << int(i)
    return SparsePoly.walsh(n, S)


def random_junta_instance(n: int, k: int, d: int, eta: float, seed: int,
                          sparsity: int | None = None) -> tuple[SparsePoly, tuple[int, ...]]:
    """A (k, eta)-junta of degree <= d together with its junta coordinates sigma.

    f = (1 - sqrt(eta)) g + sqrt(eta) w_T where g is a bounded polynomial on
    the variables of sigma and T is a nonempty set of size <= d leaving sigma.
    ``sparsity`` defaults to every subset of sigma of size <= d.
    """
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if not 0 <= eta < 1:
        raise ValueError("eta must lie in [0, 1)")
    if eta > 0 and (k == n or d < 1):
        raise ValueError("no set of size <= d leaves sigma")
    rng = _rng.generator(seed, _rng.TARGET)
    sigma = tuple(sorted(int(i) + 1 for i in rng.choice(n, size=k, replace=False)))
    r = min(d, k)
    if sparsity is None:
        sparsity = binomial_sum(k, r)
    local = _random_subsets(rng, k, r, sparsity)
    coeffs = rng.uniform(-1.0, 1.0, size=sparsity)
    coeffs /= max(1.0, float(np.abs(coeffs).sum()))
    terms: dict[int, float] = {}
    for L, c in zip(local, coeffs.tolist()):
        S = 0
        for j in range(k):
            if (L >> j) & 1:
                S |= 1 << (sigma[j] - 1)
        terms[S] = (1.0 - math.sqrt(eta)) * c
    if eta > 0:
        outside = [i for i in range(1, n + 1) if i not in set(sigma)]
        first = int(outside[int(rng.integers(len(outside)))])
        size = int(rng.integers(1, d + 1))
        rest = [i for i in range(1, n + 1) if i != first]
        T = 1 << (first - 1)
        for i in rng.choice(len(rest), size=size - 1, replace=False):
            T |= 1 << (rest[int(i)] - 1)
        terms[T] = terms.get(T, 0.0) + math.sqrt(eta)
    return SparsePoly(n, terms), sigma


def random_junta(n: int, k: int, d: int, eta: float, seed: int, sparsity: int | None = None) -> SparsePoly:
    return random_junta_instance(n, k, d, eta, seed, sparsity)[0]


@dataclass(frozen=True)
class GenSpec:
    """Recipe for a random target; ``build`` is a pure function of the fields."""

    kind: str
    n: int
    d: int
    sparsity: int | None = None
    junta_k: int | None = None
    junta_eta: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "junta" and self.junta_k is None:
            raise ValueError("junta targets need junta_k")
        if self.kind == "sparse_poly" and self.sparsity is None:
            object.__setattr__(self, "sparsity", 4)

    def with_seed(self, seed: int) -> "GenSpec":
        return GenSpec(self.kind, self.n, self.d, self.sparsity, self.junta_k, self.junta_eta, seed)

    def build(self):
        if self.kind == "tree":
            return random_tree(self.n, self.d, self.seed)
        if self.kind == "walsh":
            return random_walsh(self.n, self.d, self.seed)
        if self.kind == "sparse_poly":
            return random_bounded_poly(self.n, self.d, self.sparsity, self.seed)
        return random_junta(self.n, self.junta_k, self.d, self.junta_eta, self.seed, self.sparsity)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "GenSpec":
        return cls(**data)

    @classmethod
    def parse(cls, text: str, n: int, d: int, seed: int = 0) -> tuple["GenSpec", bool]:
        """Parse ``gen:<kind>[:key=value,...]``.

        Keys: n, d, sparsity, k (junta size), eta, seed.  Returns the spec and
        whether the seed was pinned in the text.
        """
        if not text.startswith("gen:"):
            raise ValueError("generator targets look like gen:<kind>[:key=value,...]")
        parts = text[4:].split(":", 1)
        fields: dict = {"kind": parts[0], "n": n, "d": d, "seed": seed}
        pinned = False
        if len(parts) == 2 and parts[1]:
            names = {"n": ("n", int), "d": ("d", int), "sparsity": ("sparsity", int),
                     "k": ("junta_k", int), "eta": ("junta_eta", float), "seed": ("seed", int)}
            for item in parts[1].split(","):
                key, _, value = item.partition("=")
                if key not in names:
                    raise ValueError(f"unknown generator key {key!r}")
                name, conv = names[key]
                fields[name] = conv(value)
                pinned = pinned or key == "seed"
        return cls(**fields), pinned
