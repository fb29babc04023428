"""Packings of low-degree Boolean functions and metric-entropy estimates.

The construction picks k-subsets sigma of {d, ..., n} (k = 2^{d-1}) with
small pairwise intersections and turns each into a depth-d tree T_sigma:
the first d-1 levels query x_1..x_{d-1}, and the bottom node reached along
the j-th root path in lexicographic order (-1 before +1) outputs x_{sigma_j}.
Two such trees differ exactly on the paths whose bottom variables differ,
which gives their squared distance in closed form.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _rng
from .cube import DenseFunction, as_poly, l2_distance, sq_distance
from .learners import binomial_sum
from .trees import DecisionTree, Leaf, Node, densify_tree, relabel, variables

MAX_RETRIES = 64


class ConstructionFailed(RuntimeError):
    def __init__(self, retries: int, best: int, target: int):
        super().__init__(f"best family had {best} < {target} members after {retries} retries")
        self.retries = retries
        self.best = best
        self.target = target


def family_target(m: int, k: int, eps: float) -> int:
    """max(1, floor((2k)^{-k/2} m^{(1-eps) k/2})), evaluated in logs."""
    log_t = -0.5 * k * math.log(2 * k) + 0.5 * (1 - eps) * k * math.log(m)
    if log_t > 60:
        raise OverflowError("target family size is beyond desk scale")
    return max(1, math.floor(math.exp(log_t) * (1 + 1e-12)))


@dataclass(frozen=True)
class SubsetFamily:
    """k-subsets of {offset, ..., offset + m - 1} with pairwise intersections below (1-eps)k."""

    m: int
    k: int
    eps: float
    members: tuple[tuple[int, ...], ...]
    offset: int = 1

    def __len__(self) -> int:
        return len(self.members)

    def max_intersection(self) -> int:
        best = 0
        sets = [set(s) for s in self.members]
        for a, b in itertools.combinations(sets, 2):
            best = max(best, len(a & b))
        return best


def _conflict_keys(member: tuple[int, ...], c: int):
    return itertools.combinations(member, c)


def small_intersection_family(m: int, k: int, eps: float, seed: int, offset: int = 1,
                              target: int | None = None) -> SubsetFamily:
    """Random k-subsets with every pairwise intersection smaller than (1-eps)k.

    Draws twice the target number of uniform k-subsets, keeps each one that
    is compatible with all earlier survivors, and redraws from scratch when
    fewer than the target survive.  Gives up after MAX_RETRIES redraws.
    """
    if not 1 <= k < m:
        raise ValueError("need 1 <= k < m")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if target is None:
        target = family_target(m, k, eps)
    limit = (1 - eps) * k
    c = math.ceil(limit)
    hashed = math.comb(k, c) <= 256
    rng = _rng.generator(seed, _rng.PACKING)
    best = 0
    for attempt in range(MAX_RETRIES + 1):
        kept: list[tuple[int, ...]] = []
        seen_keys: set[tuple[int, ...]] = set()
        kept_sets: list[set[int]] = []
        for _ in range(2 * target):
            draw = tuple(sorted(int(v) + offset for v in rng.choice(m, size=k, replace=False)))
            if hashed:
                keys = list(_conflict_keys(draw, c))
                if any(key in seen_keys for key in keys):
                    continue
                seen_keys.update(keys)
            else:
                s = set(draw)
                if any(len(s & t) >= limit for t in kept_sets):
                    continue
                kept_sets.append(s)
            kept.append(draw)
        best = max(best, len(kept))
        if len(kept) >= target:
            return SubsetFamily(m, k, eps, tuple(kept), offset)
    raise ConstructionFailed(MAX_RETRIES, best, target)


def sigma_tree(sigma: Sequence[int], d: int, n: int) -> DecisionTree:
    """T_sigma for a sorted 2^{d-1}-subset of {d, ..., n}."""
    if d < 1:
        raise ValueError("d must be at least 1")
    k = 2 ** (d - 1)
    sigma = tuple(sigma)
    if len(sigma) != k or len(set(sigma)) != k:
        raise ValueError(f"sigma must have {k} distinct elements")
    if list(sigma) != sorted(sigma):
        raise ValueError("sigma must be sorted")
    if sigma[0] < d or sigma[-1] > n:
        raise ValueError(f"sigma must lie in {{{d}, ..., {n}}}")

    def build(level: int, index: int) -> DecisionTree:
        if level == d - 1:
            return Node(sigma[index], Leaf(-1.0), Leaf(1.0))
        return Node(level + 1, build(level + 1, 2 * index), build(level + 1, 2 * index + 1))

    return build(0, 0)


def tree_pair_distance(sigma_r: Sequence[int], sigma_s: Sequence[int], d: int) -> float:
    """Squared L2 distance of T_sigma_r and T_sigma_s: differing positions / 2^{d-2}."""
    k = 2 ** (d - 1)
    if len(sigma_r) != k or len(sigma_s) != k:
        raise ValueError(f"both subsets must have {k} elements")
    diff = sum(1 for a, b in zip(sorted(sigma_r), sorted(sigma_s)) if a != b)
    return math.ldexp(diff, 2 - d)


def exhaustive_pair_distance(T1: DecisionTree, T2: DecisionTree) -> float:
    """Squared L2 distance from truth tables on the union of relevant variables."""
    rel = sorted(variables(T1) | variables(T2))
    if not rel:
        return (float(T1.value) - float(T2.value)) ** 2
    mapping = {v: j + 1 for j, v in enumerate(rel)}
    r = len(rel)
    a = densify_tree(relabel(T1, mapping), r).values
    b = densify_tree(relabel(T2, mapping), r).values
    return float(np.mean((a - b) ** 2))


def _min_position_distance(members: np.ndarray, d: int) -> float:
    t = members.shape[0]
    if t < 2:
        return math.inf
    best = members.shape[1]
    step = max(1, (1 << 22) // (t * members.shape[1]))
    for lo in range(0, t, step):
        block = members[lo:lo + step]
        diff = (block[:, None, :] != members[None, :, :]).sum(axis=2)
        rows = np.arange(block.shape[0])
        diff[rows, lo + rows] = members.shape[1] + 1
        best = min(best, int(diff.min()))
    return math.ldexp(best, 2 - d)


@dataclass
class PackingCertificate:
    family: SubsetFamily
    d: int
    n: int
    eps: float
    seed: int
    min_sq_distance: float
    size_bound: int
    exhaustive_checked: bool = False
    max_identity_gap: float | None = None
    trees: list[DecisionTree] = field(default_factory=list, repr=False)

    @property
    def size(self) -> int:
        return len(self.family)

    @property
    def log2_size(self) -> float:
        return math.log2(self.size)

    @property
    def lower_bound(self) -> float:
        return entropy_lower(self.n, self.d, self.eps)

    def to_json(self) -> dict:
        return {
            "n": self.n, "d": self.d, "eps": self.eps, "seed": self.seed,
            "m": self.family.m, "k": self.family.k,
            "size": self.size, "size_bound": self.size_bound,
            "log2_size": self.log2_size, "entropy_lower_bound": self.lower_bound,
            "min_sq_distance": None if math.isinf(self.min_sq_distance) else self.min_sq_distance,
            "separation": 2 * self.eps,
            "exhaustive_checked": self.exhaustive_checked,
            "max_identity_gap": self.max_identity_gap,
            "sigmas": [list(s) for s in self.family.members],
        }


def packing_family(n: int, d: int, eps: float, seed: int, verify: str = "formula") -> PackingCertificate:
    """Build the T_sigma packing of B_{n,d} and certify its separation.

    With ``verify="exhaustive"`` every pairwise closed-form distance is also
    recomputed from truth tables on the relevant variables.
    """
    if d < 1 or 2 ** d > n:
        raise ValueError("need 1 <= d <= log2(n)")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if verify not in ("formula", "exhaustive"):
        raise ValueError("verify must be 'formula' or 'exhaustive'")
    m, k = n - d + 1, 2 ** (d - 1)
    if k >= m:
        raise ValueError("ground set too small for the subset size")
    target = family_target(m, k, eps)
    fam = small_intersection_family(m, k, eps, seed, offset=d, target=target)
    trees = [sigma_tree(s, d, n) for s in fam.members]
    min_sq = _min_position_distance(np.array(fam.members, dtype=np.int64), d)
    if min_sq < 2 * eps:
        raise RuntimeError(f"separation {min_sq} below 2*eps; family invariant broken")
    cert = PackingCertificate(fam, d, n, eps, seed, min_sq, target, trees=trees)
    if verify == "exhaustive":
        gap = 0.0
        for (i, a), (j, b) in itertools.combinations(enumerate(fam.members), 2):
            closed = tree_pair_distance(a, b, d)
            gap = max(gap, abs(closed - exhaustive_pair_distance(trees[i], trees[j])))
        cert.exhaustive_checked = True
        cert.max_identity_gap = gap
    return cert


def _infer_n(funcs) -> int | None:
    for f in funcs:
        if hasattr(f, "n"):
            return f.n
    vs = set()
    for f in funcs:
        vs |= variables(f)
    return max(vs, default=1)


def distance_matrix(funcs: Sequence, n: int | None = None) -> np.ndarray:
    """Pairwise L2 distances; dense lists compare truth tables, others use Parseval."""
    p = len(funcs)
    D = np.zeros((p, p))
    if all(isinstance(f, DenseFunction) for f in funcs):
        for i, j in itertools.combinations(range(p), 2):
            D[i, j] = D[j, i] = l2_distance(funcs[i], funcs[j])
        return D
    n = n if n is not None else _infer_n(funcs)
    polys = [as_poly(f, n) for f in funcs]
    for i, j in itertools.combinations(range(p), 2):
        D[i, j] = D[j, i] = math.sqrt(sq_distance(polys[i], polys[j]))
    return D


def verify_packing(funcs: Sequence, tau: float, n: int | None = None) -> tuple[bool, float]:
    """Whether all pairwise distances exceed ``tau``, and the smallest one."""
    if len(funcs) < 2:
        return True, math.inf
    D = distance_matrix(funcs, n)
    iu = np.triu_indices(len(funcs), 1)
    dmin = float(D[iu].min())
    return dmin > tau, dmin


def _first_fit(D: np.ndarray, eps: float) -> int:
    chosen: list[int] = []
    for i in range(D.shape[0]):
        if all(D[i, j] > eps for j in chosen):
            chosen.append(i)
    return len(chosen)


def _max_separated(D: np.ndarray, eps: float) -> int:
    p = D.shape[0]
    adj = [[j for j in range(p) if j != i and D[i, j] > eps] for i in range(p)]
    best = 0

    def grow(size: int, cands: list[int]):
        nonlocal best
        if size + len(cands) <= best:
            return
        if not cands:
            best = size
            return
        for idx, v in enumerate(cands):
            if size + len(cands) - idx <= best:
                return
            nxt = [u for u in cands[idx + 1:] if u in adj_sets[v]]
            grow(size + 1, nxt)

    adj_sets = [set(a) for a in adj]
    grow(0, list(range(p)))
    return best


def greedy_packing_number(funcs: Sequence, eps: float, exhaustive: bool = False,
                          n: int | None = None) -> int:
    """Size of an eps-separated sublist (pairwise distance > eps).

    The greedy value is the best first-fit packing over every separation
    level >= eps that occurs among the pairwise distances, so it is a lower
    bound on the packing number and nonincreasing in eps.  With
    ``exhaustive`` the exact maximum is found by branch and bound.
    """
    if len(funcs) == 0:
        return 0
    D = distance_matrix(funcs, n)
    if exhaustive:
        return _max_separated(D, eps)
    levels = {eps} | {float(v) for v in D[np.triu_indices(len(funcs), 1)] if v >= eps}
    return max(_first_fit(D, lv) for lv in levels)


def exact_covering_number(funcs: Sequence, eps: float, n: int | None = None) -> int:
    """Fewest list members whose closed eps-balls cover the whole list."""
    p = len(funcs)
    if p == 0:
        return 0
    D = distance_matrix(funcs, n)
    full = (1 << p) - 1
    cover = [sum(1 << j for j in range(p) if D[i, j] <= eps) for i in range(p)]
    for size in range(1, p + 1):
        for centers in itertools.combinations(range(p), size):
            acc = 0
            for c in centers:
                acc |= cover[c]
            if acc == full:
                return size
    return p


def entropy_lower(n: int, d: int, eps: float) -> float:
    """(1 - eps) 2^{d-2} log2 n - (d + 1) 2^{d-2}."""
    scale = 2.0 ** (d - 2)
    return (1 - eps) * scale * math.log2(n) - (d + 1) * scale


class EntropyBounds(NamedTuple):
    lower: float
    upper: float
    walsh_lb: float


def entropy_bounds(n: int, d: int, eps: float, C_param: float, kappa_param: float) -> EntropyBounds:
    """Lower and upper metric-entropy estimates for B_{n,d}, plus the Walsh-packing bound.

    ``upper`` is 2^{C d} / eps^4 * ln n + kappa; neither C nor kappa has a
    known value, so both are required.  ``walsh_lb`` is log2 of the number of
    Walsh functions of degree <= d, which are pairwise sqrt(2) apart.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    lower = entropy_lower(n, d, eps)
    upper = 2.0 ** (C_param * d) / eps ** 4 * math.log(n) + kappa_param
    return EntropyBounds(lower, upper, math.log2(binomial_sum(n, d)))
