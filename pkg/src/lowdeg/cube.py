"""Points, subsets and functions on the hypercube {-1,1}^n.

Conventions
-----------
A point x is an int whose bit ``i-1`` is set iff ``x_i = -1``; mask 0 is the
all-ones point.  A subset S of {1,...,n} is an int with bit ``i-1`` set iff
``i`` is in S.  Variable indices in the public API are 1-based.  Python ints
are unbounded, so masks work for any n; batches of points are stored as
``uint64`` arrays of shape ``(Q, words(n))`` in little-endian word order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import kernels

MAX_DENSE_N = 24
ZERO_TOL = 1e-15


class DimensionError(ValueError):
    """Raised when masks, points or functions disagree on n, or n is too large."""


def words(n: int) -> int:
    return max(1, (n + 63) // 64)


def check_mask(mask: int, n: int) -> int:
    if mask < 0 or mask >> n:
        raise DimensionError(f"mask {mask:#x} has bits outside dimension {n}")
    return mask


def mask_from_vars(variables: Iterable[int]) -> int:
    """Subset mask from 1-based variable indices."""
    mask = 0
    for i in variables:
        if i < 1:
            raise DimensionError(f"variable index {i} is not 1-based")
        mask |= 1 << (i - 1)
    return mask


def vars_of(mask: int) -> tuple[int, ...]:
    """Sorted 1-based variable indices of a subset mask."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def point_from_signs(signs: Iterable[int]) -> int:
    """Encode a +/-1 vector (x_1, ..., x_n) as a point mask."""
    return mask_from_vars(i for i, s in enumerate(signs, start=1) if s == -1)


def signs_of(x: int, n: int) -> tuple[int, ...]:
    check_mask(x, n)
    return tuple(-1 if (x >> i) & 1 else 1 for i in range(n))


def flip(x: int, variables: Iterable[int]) -> int:
    return x ^ mask_from_vars(variables)


def walsh_eval(S: int, x: int, n: int) -> int:
    """w_S(x) = prod_{i in S} x_i as +1 or -1."""
    check_mask(S, n)
    check_mask(x, n)
    return -1 if (S & x).bit_count() & 1 else 1


def mask_words(mask: int, n: int) -> np.ndarray:
    w = words(n)
    return np.array([(mask >> (64 * j)) & 0xFFFFFFFFFFFFFFFF for j in range(w)], dtype=np.uint64)


def points_array(points: Iterable[int], n: int) -> np.ndarray:
    """Pack point masks into a ``(Q, words(n))`` uint64 array."""
    pts = list(points)
    out = np.empty((len(pts), words(n)), dtype=np.uint64)
    for r, x in enumerate(pts):
        check_mask(x, n)
        out[r] = mask_words(x, n)
    return out


def points_list(points: np.ndarray) -> list[int]:
    out = []
    for row in points:
        x = 0
        for j, v in enumerate(row.tolist()):
            x |= v << (64 * j)
        out.append(x)
    return out


def all_points(n: int) -> np.ndarray:
    if n > MAX_DENSE_N:
        raise DimensionError(f"n={n} is too large to enumerate (cap {MAX_DENSE_N})")
    return np.arange(1 << n, dtype=np.uint64).reshape(-1, 1)


def coordinate_bits(points: np.ndarray, i: int) -> np.ndarray:
    """Bit of coordinate i (1-based) for every point: 1 iff x_i = -1."""
    j, b = divmod(i - 1, 64)
    return (points[:, j] >> np.uint64(b)) & np.uint64(1)


def walsh_column(S: int, points: np.ndarray, n: int) -> np.ndarray:
    """w_S at every row of a point array, as +/-1.0."""
    parity = np.bitwise_count(points & mask_words(S, n)).sum(axis=1) & 1
    return 1.0 - 2.0 * parity


def transpose_bits(points: np.ndarray, n: int) -> np.ndarray:
    """Turn a ``(Q, W)`` point array into per-variable sample bitsets.

    Row ``i`` of the result has bit j set iff sample j has ``x_{i+1} = -1``;
    unused high bits are zero.
    """
    q = points.shape[0]
    raw = np.ascontiguousarray(points.astype("<u8")).view(np.uint8)
    bits = np.unpackbits(raw, axis=1, bitorder="little")[:, :n]
    qw = max(1, (q + 63) // 64)
    padded = np.zeros((n, qw * 64), dtype=np.uint8)
    padded[:, :q] = bits.T
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed.view("<u8").astype(np.uint64))


def pack_signs(values: np.ndarray) -> np.ndarray:
    """Bitset of a +/-1 vector: bit j set iff ``values[j] == -1``."""
    q = values.shape[0]
    qw = max(1, (q + 63) // 64)
    padded = np.zeros(qw * 64, dtype=np.uint8)
    padded[:q] = values < 0
    return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)


@dataclass(frozen=True)
class SparsePoly:
    """Fourier expansion: a map from subset masks to real coefficients.

    Coefficients with magnitude below ``ZERO_TOL`` are dropped on
    construction so that "exact zero" survives float arithmetic.
    """

    n: int
    coeffs: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for S, c in self.coeffs.items():
            check_mask(int(S), self.n)
            c = float(c)
            if abs(c) >= ZERO_TOL:
                clean[int(S)] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[tuple[Iterable[int], float]]) -> "SparsePoly":
        """Build from ``(variables, coefficient)`` pairs with 1-based variables."""
        acc: dict[int, float] = {}
        for vs, c in terms:
            S = mask_from_vars(vs)
            acc[S] = acc.get(S, 0.0) + c
        return cls(n, acc)

    @classmethod
    def walsh(cls, n: int, S: int, scale: float = 1.0) -> "SparsePoly":
        return cls(n, {S: scale})

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, S: int) -> float:
        return self.coeffs.get(S, 0.0)

    def degree(self) -> int:
        return max((S.bit_count() for S in self.coeffs), default=0)

    def support(self) -> set[int]:
        return set(self.coeffs)

    def sorted_items(self) -> list[tuple[int, float]]:
        return sorted(self.coeffs.items(), key=lambda kv: (kv[0].bit_count(), vars_of(kv[0])))

    def mass(self) -> float:
        return float(sum(c * c for c in self.coeffs.values()))

    def _same_n(self, other: "SparsePoly"):
        if other.n != self.n:
            raise DimensionError(f"dimension mismatch: {self.n} vs {other.n}")

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        self._same_n(other)
        acc = dict(self.coeffs)
        for S, c in other.coeffs.items():
            acc[S] = acc.get(S, 0.0) + c
        return SparsePoly(self.n, acc)

    def __neg__(self) -> "SparsePoly":
        return SparsePoly(self.n, {S: -c for S, c in self.coeffs.items()})

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def scaled(self, factor: float) -> "SparsePoly":
        return SparsePoly(self.n, {S: factor * c for S, c in self.coeffs.items()})

    def __call__(self, x: int) -> float:
        return poly_eval(self, x)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Values at every row of a ``(Q, words(n))`` point array."""
        out = np.zeros(points.shape[0])
        for S, c in self.coeffs.items():
            out += c * walsh_column(S, points, self.n)
        return out

    def densify(self) -> "DenseFunction":
        return densify(self)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "coeffs": [{"vars": list(vars_of(S)), "value": c} for S, c in self.sorted_items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SparsePoly":
        return cls.from_terms(int(data["n"]), ((t["vars"], t["value"]) for t in data["coeffs"]))


@dataclass(frozen=True, eq=False)
class DenseFunction:
    """Truth table of f indexed by point mask."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.n > MAX_DENSE_N:
            raise DimensionError(f"n={self.n} exceeds dense cap {MAX_DENSE_N}")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (1 << self.n,):
            raise DimensionError(f"expected {1 << self.n} values, got shape {vals.shape}")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def is_bounded(self) -> bool:
        return bool(np.all(np.abs(self.values) <= 1.0))

    def is_boolean(self) -> bool:
        return bool(np.all(np.abs(self.values) == 1.0))

    def __call__(self, x: int) -> float:
        check_mask(x, self.n)
        return float(self.values[x])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.values[points[:, 0].astype(np.int64)]


def poly_eval(p: SparsePoly, x: int) -> float:
    check_mask(x, p.n)
    total = 0.0
    for S, c in p.coeffs.items():
        total += -c if (S & x).bit_count() & 1 else c
    return total


def wht(f: DenseFunction) -> SparsePoly:
    """Fourier-Walsh coefficients f^(S) = E_x[f(x) w_S(x)] of a truth table."""
    if f.n > MAX_DENSE_N:
        raise DimensionError(f"n={f.n} exceeds dense cap {MAX_DENSE_N}")
    a = np.array(f.values, dtype=np.float64)
    kernels.fwht(a)
    a *= 1.0 / (1 << f.n)
    nz = np.flatnonzero(np.abs(a) >= ZERO_TOL)
    return SparsePoly(f.n, {int(S): float(a[S]) for S in nz})


def densify(p: SparsePoly) -> DenseFunction:
    if p.n > MAX_DENSE_N:
        raise DimensionError(f"n={p.n} exceeds dense cap {MAX_DENSE_N}")
    a = np.zeros(1 << p.n)
    for S, c in p.coeffs.items():
        a[S] = c
    kernels.fwht(a)
    return DenseFunction(p.n, a)


def as_poly(f, n: int | None = None) -> SparsePoly:
    """Fourier expansion of a SparsePoly, DenseFunction or decision tree.

    ``n`` is needed only for trees, which do not record their dimension.
    """
    from .trees import is_tree, tree_to_poly

    if isinstance(f, SparsePoly):
        return f
    if isinstance(f, DenseFunction):
        return wht(f)
    if is_tree(f):
        return tree_to_poly(f, n)
    raise TypeError(f"cannot take the Fourier expansion of {type(f).__name__}")


def sq_distance(p: SparsePoly, q: SparsePoly) -> float:
    """||p - q||^2 by Parseval on the coefficient difference."""
    p._same_n(q)
    total = 0.0
    for S in p.coeffs.keys() | q.coeffs.keys():
        diff = p.coeffs.get(S, 0.0) - q.coeffs.get(S, 0.0)
        total += diff * diff
    return total


def l2_distance(f, g) -> float:
    """L2 distance under the uniform measure.

    Two truth tables are compared pointwise; anything else is compared
    through its Fourier expansion, which is exact at any n for sparse
    polynomials and decision trees.
    """
    if isinstance(f, DenseFunction) and isinstance(g, DenseFunction):
        if f.n != g.n:
            raise DimensionError(f"dimension mismatch: {f.n} vs {g.n}")
        return float(np.sqrt(np.mean((f.values - g.values) ** 2)))
    n = next((h.n for h in (f, g) if hasattr(h, "n")), None)
    if n is None:
        from .trees import variables

        n = max(variables(f) | variables(g), default=1)
    return float(np.sqrt(sq_distance(as_poly(f, n), as_poly(g, n))))


def fourier_tail(p: SparsePoly, d: int) -> float:
    """Sum of c_S^2 over |S| > d."""
    return float(sum(c * c for S, c in p.coeffs.items() if S.bit_count() > d))


def concentration_residual(p: SparsePoly, family: Iterable[int]) -> float:
    """Sum of c_S^2 over S outside ``family``."""
    fam = set(family)
    return float(sum(c * c for S, c in p.coeffs.items() if S not in fam))


def degree(p: SparsePoly) -> int:
    return p.degree()
