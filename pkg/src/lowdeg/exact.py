"""Zero-error learning of degree-<=d functions.

``exact_learn_queries`` reads f on the Hamming ball of radius d around the
all-ones point and peels coefficients from the top degree down using
iterated discrete derivatives at that point.  ``exact_learn_random`` feeds
uniform samples into an exact integer row reduction until the evaluation
matrix on degree-<=d Walsh functions has full column rank, then solves the
square system in exact rational arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from . import _rng
from .cube import DenseFunction, SparsePoly, all_points, check_mask, points_array, points_list, walsh_column
from .learners import binomial_sum
from .oracle import QueryOracle


class DegreeViolation(ValueError):
    """The queried function disagrees with every polynomial of degree <= d."""


class ExactLearnFailure(RuntimeError):
    """Sample budget exhausted before the evaluation matrix reached full rank."""

    def __init__(self, rank_reached: int, queries_used: int, k: int):
        super().__init__(f"rank {rank_reached}/{k} after {queries_used} samples")
        self.rank_reached = rank_reached
        self.queries_used = queries_used
        self.k = k

    def to_json(self) -> dict:
        return {"failure": "rank_deficient", "rank_reached": self.rank_reached,
                "queries_used": self.queries_used, "k": self.k}


@dataclass(frozen=True)
class BallIndex:
    """Points of Hamming weight <= d in (popcount, numeric) order.

    Since the all-ones point is mask 0, these are exactly the points within
    Hamming distance d of it; as subset masks they also index the Walsh
    functions of degree <= d.
    """

    n: int
    d: int
    points: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if not 0 <= self.d <= self.n:
            raise ValueError("need 0 <= d <= n")
        pts = []
        for r in range(self.d + 1):
            layer = [reduce(lambda a, i: a | (1 << i), c, 0) for c in _combinations(self.n, r)]
            pts.extend(sorted(layer))
        object.__setattr__(self, "points", tuple(pts))

    @property
    def k(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def _combinations(n: int, r: int):
    from itertools import combinations

    return combinations(range(n), r)


def _submasks(S: int):
    sub = S
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & S


def discrete_derivative(f: DenseFunction, i: int) -> DenseFunction:
    """(f(x with x_i = 1) - f(x with x_i = -1)) / 2.

    The result no longer depends on x_i and has expansion
    sum over S containing i of c_S w_{S - i}.
    """
    if not 1 <= i <= f.n:
        raise IndexError(f"variable x_{i} out of range for n={f.n}")
    bit = 1 << (i - 1)
    idx = np.arange(1 << f.n)
    return DenseFunction(f.n, (f.values[idx & ~bit] - f.values[idx | bit]) / 2.0)


def derivative_at_ones(oracle: QueryOracle, S: int) -> float:
    """Iterated derivative over the variables of S, evaluated at the all-ones point.

    Equals 2^{-|S|} sum over F subset of S of (-1)^{|F|} f(1 flipped on F);
    every evaluation point has Hamming weight <= |S|.
    """
    r = S.bit_count()
    if r < 1:
        raise ValueError("S must be nonempty")
    check_mask(S, oracle.n)
    total = 0.0
    for F in _submasks(S):
        v = oracle.query(F)
        total += -v if F.bit_count() & 1 else v
    return math.ldexp(total, -r)


def _peel(values: dict[int, float], ball: BallIndex) -> dict[int, float]:
    """Coefficients of the unique degree-<=d interpolant of ball values."""
    n, d = ball.n, ball.d
    pts = points_array(ball.points, n)
    resid = np.array([values[x] for x in ball.points], dtype=np.float64)
    pos = {x: j for j, x in enumerate(ball.points)}
    coeffs: dict[int, float] = {}
    by_degree: dict[int, list[int]] = {}
    for S in ball.points:
        by_degree.setdefault(S.bit_count(), []).append(S)
    for r in range(d, -1, -1):
        layer = by_degree.get(r, [])
        found = []
        for S in layer:
            total = 0.0
            for F in _submasks(S):
                v = resid[pos[F]]
                total += -v if F.bit_count() & 1 else v
            c = math.ldexp(total, -r)
            coeffs[S] = c
            found.append((S, c))
        for S, c in found:
            if c != 0.0:
                resid -= c * walsh_column(S, pts, n)
    return coeffs


def exact_learn_queries(oracle: QueryOracle, n: int, d: int, verify=None, tol: float = 1e-9,
                        seed: int = 0) -> SparsePoly:
    """Recover a degree-<=d function from its values on the radius-d ball.

    Each ball point is queried once, so a distinct-counting oracle ends at
    exactly sum_{j<=d} C(n, j).  ``verify`` adds a post-hoc degree check
    through uncharged ``peek`` evaluations: ``"full"`` compares on the whole
    cube (n <= 24), an int compares on that many seeded random points.
    Raises DegreeViolation when a check fails.
    """
    if oracle.n != n:
        raise ValueError("oracle and arguments disagree on n")
    ball = BallIndex(n, d)
    values = {x: oracle.query(x) for x in ball.points}
    coeffs = _peel(values, ball)
    poly = SparsePoly(n, coeffs)
    if verify is not None:
        if verify == "full":
            pts = all_points(n)
        else:
            pts = _rng.uniform_points(_rng.generator(seed, _rng.SAMPLES), int(verify), n)
        truth = np.array([oracle.peek(x) for x in points_list(pts)])
        gap = float(np.max(np.abs(poly.evaluate(pts) - truth))) if len(truth) else 0.0
        if gap > tol:
            raise DegreeViolation(f"reconstruction misses f by {gap:.3g}; f has degree > {d}")
    return poly


class ExactSolveState:
    """Incremental exact row reduction of the degree-<=d evaluation matrix.

    Each observation contributes the row (w_S(x))_{|S|<=d} over the columns
    of ``BallIndex(n, d)``.  Rows are reduced against the stored pivots with
    integer-preserving updates followed by removal of the row content, so no
    floating tolerance enters rank decisions.  Right-hand sides are carried
    as exact rationals.
    """

    def __init__(self, n: int, d: int):
        self.n, self.d = n, d
        self.columns = BallIndex(n, d).points
        self.k = len(self.columns)
        self.rows: list[tuple[int, float]] = []
        self._basis: list[tuple[int, list[int], Fraction]] = []

    @property
    def rank(self) -> int:
        return len(self._basis)

    def row_of(self, x: int) -> list[int]:
        return [-1 if (S & x).bit_count() & 1 else 1 for S in self.columns]

    def append(self, x: int, y: float) -> bool:
        """Add an observation; return whether the rank grew."""
        check_mask(x, self.n)
        self.rows.append((x, y))
        if self.rank == self.k:
            return False
        row = self.row_of(x)
        rhs = Fraction(y)
        for p, brow, brhs in self._basis:
            a = row[p]
            if a:
                bp = brow[p]
                row = [bp * u - a * v for u, v in zip(row, brow)]
                rhs = bp * rhs - a * brhs
        g = 0
        for u in row:
            if u:
                g = math.gcd(g, u)
        if g == 0:
            return False
        if g > 1:
            row = [u // g for u in row]
            rhs = rhs / g
        pivot = next(j for j, u in enumerate(row) if u)
        self._basis.append((pivot, row, rhs))
        return True

    def solve(self) -> SparsePoly:
        """Coefficients from the first k independent rows (needs full rank)."""
        if self.rank < self.k:
            raise ExactLearnFailure(self.rank, len(self.rows), self.k)
        sol: dict[int, Fraction] = {}
        for p, row, rhs in reversed(self._basis):
            acc = rhs
            for j, u in enumerate(row):
                if u and j != p:
                    acc -= u * sol[j]
            sol[p] = acc / row[p]
        return SparsePoly(self.n, {self.columns[j]: float(v) for j, v in sol.items()})


def exact_rank_append(state: ExactSolveState, x: int, y: float) -> ExactSolveState:
    state.append(x, y)
    return state


def random_budget(n: int, d: int, delta: float, C: float = 4.0) -> int:
    """ceil(C * 2^d * k * ln(k / delta)) with k = sum_{j<=d} C(n, j)."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    k = binomial_sum(n, d)
    return max(1, math.ceil(C * (2 ** d) * k * math.log(k / delta)))


def injectivity_failure_bound(q: int, k: int, d: int) -> float:
    """min(1, (2Q)^{k-1} (1 - 2^{-d})^Q): chance the sampled evaluation map is not injective."""
    if d == 0:
        return 0.0 if q >= 1 else 1.0
    log_bound = (k - 1) * math.log(2 * q) + q * math.log1p(-(2.0 ** -d))
    return math.exp(min(0.0, log_bound))


def exact_learn_random(oracle: QueryOracle, n: int, d: int, delta: float, seed: int,
                       budget: int | None = None, C: float = 4.0) -> SparsePoly:
    """Draw uniform examples until the evaluation matrix has rank k, then solve exactly.

    Every draw is charged.  Raises ExactLearnFailure when ``budget`` draws
    (default ``random_budget(n, d, delta, C)``) leave the rank below k.
    """
    if oracle.n != n:
        raise ValueError("oracle and arguments disagree on n")
    if budget is None:
        budget = random_budget(n, d, delta, C)
    state = ExactSolveState(n, d)
    rng = _rng.generator(seed, _rng.SAMPLES)
    before = oracle.count
    chunk = max(64, 4 * state.k)
    drawn = 0
    while state.rank < state.k and drawn < budget:
        take = min(chunk, budget - drawn)
        for x in points_list(_rng.uniform_points(rng, take, n)):
            state.append(x, oracle.query(x))
            drawn += 1
            if state.rank == state.k:
                break
    if state.rank < state.k:
        raise ExactLearnFailure(state.rank, oracle.count - before, state.k)
    return state.solve()
