"""Closed-form query-complexity bounds.

Unsubscripted logarithms are natural; base-2 logarithms are written log2.
Formulas with an unspecified universal constant read it from
``BoundParams.C_univ`` and raise MissingConstant when it is absent, so no
constant is ever defaulted silently.  ``paper_plausible`` fills every such
slot with a conventional, non-normative choice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .learners import binomial_sum

# Kind -> name of the universal constant it needs (None when fully explicit).
UPPER_KINDS: dict[str, str | None] = {
    "lmn": None,
    "ei": "C_ei",
    "ei2": None,
    "thresholded": None,
    "junta": None,
    "boolean": None,
    "robust": "C_robust",
    "robust_boolean": "C_robust_boolean",
    "circuits": "C_circuits",
    "dfko_remark": "C_dfko",
    "exact_rand": "C_exact",
    "exact_det": None,
}

PROFILE_DEPENDENT = {"robust_boolean"}


class MissingConstant(KeyError):
    """A formula needs a value the caller did not supply."""

    def __init__(self, symbol: str, kind: str):
        super().__init__(f"{kind} needs {symbol}")
        self.symbol = symbol
        self.kind = kind

    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class BoundParams:
    n: int
    d: int
    eps: float
    delta: float | None = None
    eta: float = 0.0
    t: float = 0.0
    m: int | None = None
    k: int | None = None
    s: float | None = None
    B_d: float | None = None
    C_univ: dict = field(default_factory=dict)
    o1_exponents: tuple[float, float] | None = None
    profile: str = "explicit"

    def __post_init__(self):
        if not self.n >= self.d >= 0:
            raise ValueError("need n >= d >= 0")
        if not 0 <= self.eps <= 1:
            raise ValueError("eps must lie in [0, 1]")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")

    def to_json(self) -> dict:
        out = {k: getattr(self, k) for k in ("n", "d", "eps", "delta", "eta", "t", "m", "k", "s", "B_d", "profile")}
        out["C_univ"] = dict(sorted(self.C_univ.items()))
        out["o1_exponents"] = list(self.o1_exponents) if self.o1_exponents is not None else None
        return out


def plausible_bh_constant(d: int) -> float:
    """exp(sqrt(d ln d)), the known growth rate with its constant set to 1."""
    return math.exp(math.sqrt(d * math.log(d))) if d >= 2 else 1.0


def paper_plausible(params: BoundParams) -> BoundParams:
    """Every universal constant 1, B_d = exp(sqrt(d ln d)), o(1) exponents 0.  Non-normative."""
    consts = {name: 1.0 for name in UPPER_KINDS.values() if name}
    consts.update(params.C_univ)
    return replace(
        params,
        C_univ=consts,
        B_d=params.B_d if params.B_d is not None else plausible_bh_constant(params.d),
        o1_exponents=params.o1_exponents if params.o1_exponents is not None else (0.0, 0.0),
        profile="paper-plausible",
    )


def _need(params: BoundParams, attr: str, kind: str):
    v = getattr(params, attr)
    if v is None:
        raise MissingConstant(attr, kind)
    return v


def _const(params: BoundParams, kind: str) -> float:
    name = UPPER_KINDS[kind]
    if name not in params.C_univ:
        raise MissingConstant(name, kind)
    return float(params.C_univ[name])


def _exp(log_value: float) -> float:
    return math.exp(log_value) if log_value < 709 else math.inf


def q_exact(n: int, d: int) -> int:
    """sum_{j<=d} C(n, j)."""
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")
    return binomial_sum(n, d)


def q_lower(params: BoundParams, randomized: bool = False) -> float:
    """max{(1 - sqrt eps) 2^{d-2} log2 n - (d+1) 2^{d-2}, d log2(n/d)}, minus log2(1/(1-delta)) if randomized."""
    n, d, eps = params.n, params.d, params.eps
    scale = 2.0 ** (d - 2)
    first = (1 - math.sqrt(eps)) * scale * math.log2(n) - (d + 1) * scale
    second = d * math.log2(n / d) if d > 0 else 0.0
    value = max(first, second)
    if randomized:
        value += math.log2(1 - _need(params, "delta", "q_lower"))
    return value


def bh_subset_bound(d: int, eps: float, B_d: float) -> float:
    """B_d^{2d} / eps^d: how many coefficients of f in F_{n,d} can exceed eps^{(d+1)/2} B_d^{-d}."""
    if B_d < 1:
        raise ValueError("B_d must be at least 1")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    return B_d ** (2 * d) / eps ** d


def q_upper(kind: str, params: BoundParams) -> float:
    """Evaluate one upper bound on the sample count.

    kinds: lmn, ei, ei2, thresholded, junta, boolean, robust, robust_boolean,
    circuits, dfko_remark, exact_rand, exact_det.
    """
    if kind not in UPPER_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}")
    n, d, eps = params.n, params.d, params.eps
    if kind == "exact_det":
        return float(q_exact(n, d))
    delta = _need(params, "delta", kind)
    if not eps > 0:
        raise ValueError("eps must be positive")
    log_n_delta = math.log(n / delta)

    if kind == "lmn":
        nd = float(n) ** d
        return float(math.ceil((2 * nd / eps) * math.log(2 * nd / delta) * (1 - 1e-12)))
    if kind == "ei":
        C = _const(params, kind)
        lead = _exp(C * d ** 1.5 * math.sqrt(math.log(d)) - (d + 1) * math.log(eps)) if d >= 1 else 1 / eps
        return min(lead, 4 * d * float(n) ** d / eps) * log_n_delta
    if kind == "ei2":
        B = _need(params, "B_d", kind)
        return math.e ** 8 * d * d / eps ** (d + 1) * B ** (2 * d) * log_n_delta
    if kind == "thresholded":
        m = _need(params, "m", kind)
        return float(math.ceil(18 * m / eps * math.log(2 / delta * binomial_sum(n, d)) * (1 - 1e-12)))
    if kind == "junta":
        k = _need(params, "k", kind)
        r = min(d, k)
        value = 18 / eps * binomial_sum(k, r) * math.log(2 / delta * binomial_sum(n, r))
        return float(math.ceil(value * (1 - 1e-12)))
    if kind == "boolean":
        return _exp(math.log(36 * d) + d * d * math.log(2) - math.log(eps)) * log_n_delta
    if kind == "robust":
        C = _const(params, kind)
        if not params.eta > 0:
            raise MissingConstant("eta", kind)
        return _exp(C * d * d * math.log(2) - 2 * d * math.log(params.eta) - math.log(eps)) * log_n_delta
    if kind == "robust_boolean":
        C = _const(params, kind)
        _need(params, "o1_exponents", kind)
        return _exp(C * d * d * math.log(2) - math.log(eps)) * log_n_delta
    if kind == "circuits":
        C = _const(params, kind)
        s = _need(params, "s", kind)
        if not s > 1:
            raise ValueError("circuit size must exceed 1")
        expo = C * math.log(s / eps) ** (d - 2) * math.log(s) * math.log(1 / eps)
        return _exp(expo) * log_n_delta
    if kind == "dfko_remark":
        C = _const(params, kind)
        return _exp(C * d * d * math.log(2) - (2 * d + 1) * math.log(eps)) * log_n_delta
    # exact_rand
    C = _const(params, kind)
    return C * d * 2 ** d * float(n) ** d * log_n_delta


def robust_eta_threshold(params: BoundParams) -> float:
    """Smallest eta covered by the robust bound: C d^2 ln d / ln(1/t)."""
    C = _const(params, "robust")
    t = params.t
    if t <= 0:
        return 0.0
    d = params.d
    return C * d * d * (math.log(d) if d > 1 else 0.0) / math.log(1 / t)


def robust_boolean_eta_threshold(params: BoundParams) -> float:
    """t^{1+a} d^{1/2+b} for the supplied exponent corrections (a, b)."""
    a, b = _need(params, "o1_exponents", "robust_boolean")
    return params.t ** (1 + a) * params.d ** (0.5 + b)


def bound_table(params: BoundParams, kinds=None) -> list[dict]:
    """One row per kind; kinds whose inputs are missing carry the missing symbol instead of a value."""
    rows = []
    for kind in kinds or UPPER_KINDS:
        row = {"kind": kind, "profile": params.profile, "profile_dependent": kind in PROFILE_DEPENDENT}
        try:
            row["value"] = q_upper(kind, params)
            row["missing"] = None
        except MissingConstant as exc:
            row["value"] = None
            row["missing"] = exc.symbol
        rows.append(row)
    return rows
