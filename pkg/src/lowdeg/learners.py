"""Random-example learners: thresholded empirical Fourier and classical low-degree.

Both draw one shared sample X_1..X_Q and estimate every coefficient
alpha_S = (1/Q) sum_j f(X_j) w_S(X_j) with |S| <= d from it.  The thresholded
learner keeps only the S with |alpha_S| >= 2b, where the default
b = sqrt(eps / (9 m)) is the largest threshold for which the error bound
eta + t + 9 b^2 m stays within eta + t + eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import _rng, kernels
from .cube import SparsePoly, pack_signs, points_array, transpose_bits, vars_of, walsh_column
from .oracle import QueryOracle

# Largest number of emitted subsets a single scan may buffer.
MAX_TERMS = 1 << 22


def binomial_sum(n: int, d: int) -> int:
    """Number of subsets of {1..n} with at most d elements."""
    return sum(math.comb(n, r) for r in range(0, min(d, n) + 1))


def _ceil(x: float) -> int:
    # Values within a few ulps above an integer count as that integer.
    return math.ceil(x * (1.0 - 1e-12))


def required_samples(b: float, n: int, d: int, delta: float) -> int:
    """ceil((2 / b^2) * ln((2 / delta) * sum_{r<=d} C(n, r))), at least 1."""
    if not b > 0:
        raise ValueError("threshold b must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")
    log_arg = math.log(2.0 / delta) + math.log(binomial_sum(n, d))
    value = (2.0 / (b * b)) * log_arg
    if not math.isfinite(value) or value > 1e12:
        raise OverflowError(f"sample count {value:.3g} is beyond desk scale")
    return max(1, _ceil(value))


def junta_family_size(k: int, d: int) -> int:
    """m for (k, eta)-juntas of degree d: subsets of the junta of size <= d."""
    return binomial_sum(k, d)


@dataclass(frozen=True)
class ThresholdConfig:
    """Parameters of the thresholded learner.

    ``eta`` and ``t`` never influence the algorithm; they are carried so that
    reports can state the guaranteed error eta + t + eps.
    """

    n: int
    d: int
    m: int
    eps: float
    delta: float
    b: float | None = None
    family: frozenset[int] | None = None
    eta: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if not 0 <= self.d <= self.n:
            raise ValueError("need 0 <= d <= n")
        if not 0 < self.eps < 1 or not 0 < self.delta < 1:
            raise ValueError("eps and delta must lie in (0, 1)")
        if self.b is None and self.m < 1:
            raise ValueError("m must be at least 1 when b is derived")
        if self.b is not None and not self.b > 0:
            raise ValueError("b must be positive")
        if self.family is not None:
            object.__setattr__(self, "family", frozenset(self.family))

    @property
    def threshold(self) -> float:
        return self.b if self.b is not None else math.sqrt(self.eps / (9.0 * self.m))

    @property
    def error_budget(self) -> float:
        return self.eta + self.t + self.eps

    def to_json(self) -> dict:
        out = {
            "n": self.n, "d": self.d, "m": self.m, "eps": self.eps, "delta": self.delta,
            "b": self.threshold, "b_overridden": self.b is not None, "eta": self.eta, "t": self.t,
        }
        if self.family is not None:
            out["family"] = sorted(list(vars_of(S)) for S in self.family)
        return out


@dataclass
class LearnReport:
    queries_used: int
    b: float | None
    selected: frozenset[int]
    hypothesis: SparsePoly
    seed: int
    num_samples: int
    aborted: bool = False
    alphas: dict[int, float] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return {
            "queries_used": self.queries_used,
            "b": self.b,
            "num_samples": self.num_samples,
            "seed": self.seed,
            "aborted": self.aborted,
            "selected": sorted((list(vars_of(S)) for S in self.selected), key=lambda v: (len(v), v)),
            "hypothesis": self.hypothesis.to_json(),
        }


def _as_points(samples, n: int) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        return samples
    return points_array(samples, n)


def scan_spectrum(points: np.ndarray, values: np.ndarray, n: int, d: int,
                  threshold: float, cap: int) -> tuple[list[int], list[float], bool]:
    """Empirical coefficients alpha_S, |S| <= d, with |alpha_S| >= threshold.

    Returns masks and alphas in depth-first lexicographic order, and whether
    the scan stopped because more than ``cap`` subsets qualified.  +/-1
    labels take the bit-packed path; real labels the floating one.
    """
    q = points.shape[0]
    if q == 0:
        raise ValueError("need at least one sample")
    cols = transpose_bits(points, n)
    if np.all(np.abs(values) == 1.0):
        c = np.arange(q + 1)
        alpha_of = (q - 2 * c) / q
        keep = (np.abs(alpha_of) >= threshold).astype(np.uint8)
        rows, stat, truncated = kernels.spectrum_bits(cols, pack_signs(values), d, keep, cap)
        alphas = alpha_of[stat]
    else:
        bits = np.unpackbits(cols.astype("<u8").view(np.uint8), axis=1, bitorder="little")[:, :q]
        signs = np.ascontiguousarray(1.0 - 2.0 * bits, dtype=np.float64)
        y = np.ascontiguousarray(values, dtype=np.float64)
        rows, stat, truncated = kernels.spectrum_real(signs, y, d, threshold, cap)
        alphas = stat / q
    masks = []
    for row in rows.tolist():
        S = 0
        for v in row:
            if v >= 0:
                S |= 1 << v
        masks.append(S)
    return masks, alphas.tolist(), bool(truncated)


def estimate_spectrum(oracle: QueryOracle, samples, d: int,
                      family: Iterable[int] | None = None) -> dict[int, float]:
    """alpha_S for every |S| <= d (or every S in ``family``) from shared samples.

    Charges the oracle once per sample.
    """
    n = oracle.n
    points = _as_points(samples, n)
    if points.shape[0] == 0:
        raise ValueError("need at least one sample")
    values = oracle.query_batch(points)
    if family is not None:
        q = points.shape[0]
        return {S: float(values @ walsh_column(S, points, n)) / q for S in family}
    total = binomial_sum(n, d)
    if total > MAX_TERMS:
        raise MemoryError(f"{total} coefficients is too many to tabulate; use learn_sparse")
    masks, alphas, _ = scan_spectrum(points, values, n, d, 0.0, total)
    return dict(zip(masks, alphas))


def threshold_select(alpha: dict[int, float], b: float) -> set[int]:
    """{S : |alpha_S| >= 2b}."""
    if not b > 0:
        raise ValueError("b must be positive")
    return {S for S, a in alpha.items() if abs(a) >= 2 * b}


def abort_cap(b: float, budget: float) -> int:
    """Largest hypothesis size that can still meet ``budget`` for a bounded target.

    At most 1/b^2 coefficients of a [-1,1]-valued f reach b in magnitude;
    every other selected S has |alpha_S - f(S)| > b, so a selection of more
    than 1/b^2 + budget/b^2 sets already has squared error above ``budget``.
    One extra slot absorbs rounding in the two quotients.
    """
    return int(math.floor(1.0 / (b * b))) + int(math.ceil(budget / (b * b))) + 1


def learn_sparse(oracle: QueryOracle, cfg: ThresholdConfig, seed: int,
                 num_samples: int | None = None, abort_budget: float | None = None) -> LearnReport:
    """Thresholded empirical-Fourier learner.

    Draws ``required_samples(b, n, d, delta)`` uniform points (or
    ``num_samples`` when given) from the seeded stream and returns
    h = sum over |alpha_S| >= 2b of alpha_S w_S.  With ``abort_budget`` the
    scan stops as soon as the selection provably exceeds that squared error
    for any [-1,1]-valued target; the report is then marked ``aborted``.
    """
    if oracle.n != cfg.n:
        raise ValueError("oracle and config disagree on n")
    b = cfg.threshold
    q = num_samples if num_samples is not None else required_samples(b, cfg.n, cfg.d, cfg.delta)
    before = oracle.count
    points = _rng.uniform_points(_rng.generator(seed, _rng.SAMPLES), q, cfg.n)
    values = oracle.query_batch(points)
    aborted = False
    if cfg.family is not None:
        fam = sorted(S for S in cfg.family if S.bit_count() <= cfg.d)
        alphas = {S: float(values @ walsh_column(S, points, cfg.n)) / q for S in fam}
        chosen = {S: a for S, a in alphas.items() if abs(a) >= 2 * b}
    else:
        cap = abort_cap(b, abort_budget) if abort_budget is not None else binomial_sum(cfg.n, cfg.d)
        masks, vals, truncated = scan_spectrum(points, values, cfg.n, cfg.d, 2 * b, min(cap, MAX_TERMS))
        if truncated and cap > MAX_TERMS:
            raise MemoryError(f"more than {MAX_TERMS} coefficients passed the threshold")
        aborted = truncated
        chosen = dict(zip(masks, vals))
    return LearnReport(
        queries_used=oracle.count - before,
        b=b,
        selected=frozenset(chosen),
        hypothesis=SparsePoly(cfg.n, chosen),
        seed=seed,
        num_samples=q,
        aborted=aborted,
        alphas=chosen,
    )


def lmn_samples(n: int, d: int, eps: float, delta: float) -> int:
    """ceil((2 n^d / eps) * ln(2 n^d / delta))."""
    if not 0 < eps < 1 or not 0 < delta < 1:
        raise ValueError("eps and delta must lie in (0, 1)")
    nd = n ** d
    value = (2.0 * nd / eps) * (math.log(2.0 / delta) + math.log(nd))
    if not math.isfinite(value) or value > 1e12:
        raise OverflowError(f"sample count {value:.3g} is beyond desk scale")
    return max(1, _ceil(value))


def learn_lowdegree_lmn(oracle: QueryOracle, n: int, d: int, eps: float, delta: float,
                        seed: int, num_samples: int | None = None) -> LearnReport:
    """Classical low-degree algorithm: keep every estimated coefficient with |S| <= d."""
    q = num_samples if num_samples is not None else lmn_samples(n, d, eps, delta)
    total = binomial_sum(n, d)
    if total > MAX_TERMS:
        raise MemoryError(f"{total} coefficients is too many to tabulate")
    before = oracle.count
    points = _rng.uniform_points(_rng.generator(seed, _rng.SAMPLES), q, n)
    values = oracle.query_batch(points)
    masks, vals, _ = scan_spectrum(points, values, n, d, 0.0, total)
    alphas = dict(zip(masks, vals))
    return LearnReport(
        queries_used=oracle.count - before,
        b=None,
        selected=frozenset(alphas),
        hypothesis=SparsePoly(n, alphas),
        seed=seed,
        num_samples=q,
        alphas=alphas,
    )


def event_holds(alpha: dict[int, float], target: SparsePoly, b: float) -> bool:
    """Whether max over the tabulated S of |alpha_S - f(S)| is at most b."""
    return all(abs(a - target[S]) <= b for S, a in alpha.items())
