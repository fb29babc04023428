"""Experiment engine behind the command-line interface.

Every trial owns its oracle and random streams, so trials can run in any
order on a thread pool (the compiled kernels release the GIL).  Records come
back sorted by seed and all aggregates are computed from the sorted list,
which keeps reports identical regardless of scheduling.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .cube import DenseFunction, SparsePoly, as_poly, sq_distance
from .exact import (DegreeViolation, ExactLearnFailure, exact_learn_queries, exact_learn_random,
                    injectivity_failure_bound, random_budget)
from .generators import GenSpec
from .learners import (ThresholdConfig, binomial_sum, learn_lowdegree_lmn, learn_sparse,
                       required_samples)
from .oracle import QueryOracle
from .packing import packing_family
from .trees import is_tree, tree_from_json, variables

EXACT_TOL = 1e-18


def worker_count() -> int:
    """Pool size: LOWDEG_THREADS when set, else the CPU count."""
    env = os.environ.get("LOWDEG_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"LOWDEG_THREADS must be a positive integer, got {env!r}") from None
        if value < 1:
            raise ValueError("LOWDEG_THREADS must be at least 1")
        return value
    return os.cpu_count() or 1


def pool_map(fn, items, threads: int | None = None) -> list:
    items = list(items)
    threads = threads or worker_count()
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------- targets

@dataclass(frozen=True)
class TargetSource:
    """Where trial targets come from: a generator recipe or a fixed file."""

    spec: GenSpec | None = None
    seed_pinned: bool = False
    path: str | None = None
    fixed: object = None

    @classmethod
    def parse(cls, text: str, n: int, d: int) -> "TargetSource":
        if text.startswith("gen:"):
            spec, pinned = GenSpec.parse(text, n, d)
            return cls(spec=spec, seed_pinned=pinned)
        if text.startswith("file:"):
            path = text[5:]
            return cls(path=path, fixed=load_target(path, n))
        raise ValueError("target must be gen:<spec> or file:<path>")

    def build(self, seed: int):
        if self.spec is None:
            return self.fixed
        spec = self.spec if self.seed_pinned else self.spec.with_seed(seed)
        return spec.build()

    def describe(self, seed: int) -> dict:
        if self.spec is None:
            return {"file": self.path}
        spec = self.spec if self.seed_pinned else self.spec.with_seed(seed)
        return spec.to_json()


def load_target(path: str, n: int):
    """Read a SparsePoly ({"n", "coeffs"}), a tree ({"var", ...} or {"leaf"}), or a truth table ({"n", "values"})."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read target file {path}: {exc}") from exc
    if "coeffs" in data:
        poly = SparsePoly.from_json(data)
        if poly.n != n:
            raise ValueError(f"target file has n={poly.n}, expected {n}")
        return poly
    if "values" in data:
        return DenseFunction(int(data["n"]), data["values"])
    if "var" in data or "leaf" in data:
        return tree_from_json(data)
    raise ValueError(f"unrecognized target format in {path}")


def target_poly(target, n: int) -> SparsePoly:
    return as_poly(target, n)


def auto_m(target, n: int, d: int) -> int:
    """Size of a family carrying the whole spectrum: subsets of the relevant variables up to size d."""
    if is_tree(target):
        return binomial_sum(len(variables(target)), d)
    poly = as_poly(target, n)
    rel = 0
    for S in poly.coeffs:
        rel |= S
    return max(1, min(len(poly.coeffs), binomial_sum(rel.bit_count(), d)))


# ---------------------------------------------------------------- records

@dataclass
class ExperimentRecord:
    genspec: dict
    learner: str
    config: dict
    queries_used: int
    sq_error: float | None
    error_budget: float
    success: bool
    seed: int
    detail: dict = field(default_factory=dict)
    wall_time: float | None = None

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "genspec": self.genspec, "learner": self.learner, "config": self.config,
            "queries_used": self.queries_used, "sq_error": self.sq_error,
            "error_budget": self.error_budget, "success": self.success, "seed": self.seed,
            "detail": self.detail,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


CSV_COLUMNS = ["row", "seed", "learner", "queries_used", "sq_error", "error_budget", "success", "note"]


def aggregate(records: list[ExperimentRecord]) -> dict:
    trials = len(records)
    failures = sum(1 for r in records if not r.success)
    queries = [r.queries_used for r in records]
    return {
        "trials": trials,
        "failures": failures,
        "failure_fraction": failures / trials if trials else 0.0,
        "mean_queries": sum(queries) / trials if trials else 0.0,
        "max_queries": max(queries) if queries else 0,
    }


def _timed(fn):
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        rec = fn(*args, **kwargs)
        rec.wall_time = time.perf_counter() - start
        return rec

    return wrapper


# ---------------------------------------------------------------- learn

@dataclass(frozen=True)
class LearnSettings:
    learner: str
    n: int
    d: int
    eps: float
    delta: float
    m: int | None
    eta: float = 0.0
    t: float = 0.0
    num_samples: int | None = None
    abort: bool = False

    def to_json(self) -> dict:
        return {"learner": self.learner, "n": self.n, "d": self.d, "eps": self.eps,
                "delta": self.delta, "m": self.m if self.m is not None else "auto",
                "eta": self.eta, "t": self.t, "num_samples": self.num_samples, "abort": self.abort}


@_timed
def learn_trial(source: TargetSource, st: LearnSettings, seed: int) -> ExperimentRecord:
    target = source.build(seed)
    truth = target_poly(target, st.n)
    oracle = QueryOracle(target, st.n)
    if st.learner == "sparse":
        m = st.m if st.m is not None else auto_m(target, st.n, st.d)
        cfg = ThresholdConfig(st.n, st.d, m, st.eps, st.delta, eta=st.eta, t=st.t)
        report = learn_sparse(oracle, cfg, seed, num_samples=st.num_samples,
                              abort_budget=cfg.error_budget if st.abort else None)
        budget = cfg.error_budget
        detail = {"m": m, "b": report.b, "selected": len(report.selected), "aborted": report.aborted}
    elif st.learner == "lmn":
        report = learn_lowdegree_lmn(oracle, st.n, st.d, st.eps, st.delta, seed, num_samples=st.num_samples)
        budget = st.t + st.eps
        detail = {"selected": len(report.selected), "aborted": False}
    else:
        raise ValueError(f"unknown learner {st.learner!r}")
    err = sq_distance(report.hypothesis, truth)
    ok = (not report.aborted) and err <= budget
    return ExperimentRecord(source.describe(seed), st.learner, st.to_json(), report.queries_used,
                            err, budget, ok, seed, detail)


def run_learn(source: TargetSource, st: LearnSettings, trials: int, seed: int,
              threads: int | None = None) -> tuple[list[ExperimentRecord], dict]:
    seeds = range(seed, seed + trials)
    records = pool_map(lambda s: learn_trial(source, st, s), seeds, threads)
    records.sort(key=lambda r: r.seed)
    agg = aggregate(records)
    agg["passed"] = agg["failure_fraction"] <= st.delta
    return records, agg


# ---------------------------------------------------------------- exact

@dataclass(frozen=True)
class ExactSettings:
    mode: str
    n: int
    d: int
    delta: float = 0.1
    C: float = 4.0
    budget: int | None = None
    verify: object = "auto"

    def resolved_verify(self):
        if self.verify == "auto":
            return "full" if self.n <= 16 else 64
        return self.verify

    def resolved_budget(self) -> int:
        return self.budget if self.budget is not None else random_budget(self.n, self.d, self.delta, self.C)

    def to_json(self) -> dict:
        out = {"mode": self.mode, "n": self.n, "d": self.d}
        if self.mode == "random":
            out.update(delta=self.delta, budget_constant=self.C, budget=self.resolved_budget())
        else:
            out["verify"] = self.resolved_verify()
        return out


@_timed
def exact_trial(source: TargetSource, st: ExactSettings, seed: int) -> ExperimentRecord:
    target = source.build(seed)
    k = binomial_sum(st.n, st.d)
    detail: dict = {"k": k}
    if st.mode == "queries":
        oracle = QueryOracle(target, st.n, distinct=True)
        try:
            poly = exact_learn_queries(oracle, st.n, st.d, verify=st.resolved_verify(), seed=seed)
        except DegreeViolation as exc:
            detail["failure"] = f"degree_violation: {exc}"
            return ExperimentRecord(source.describe(seed), "exact_queries", st.to_json(), oracle.count,
                                    None, EXACT_TOL, False, seed, detail)
        err = sq_distance(poly, target_poly(target, st.n))
        detail["count_matches"] = oracle.count == k
        ok = detail["count_matches"] and err < EXACT_TOL
        return ExperimentRecord(source.describe(seed), "exact_queries", st.to_json(), oracle.count,
                                err, EXACT_TOL, ok, seed, detail)
    if st.mode == "random":
        oracle = QueryOracle(target, st.n)
        try:
            poly = exact_learn_random(oracle, st.n, st.d, st.delta, seed, budget=st.resolved_budget())
        except ExactLearnFailure as exc:
            detail.update(exc.to_json())
            return ExperimentRecord(source.describe(seed), "exact_random", st.to_json(), exc.queries_used,
                                    None, EXACT_TOL, False, seed, detail)
        err = sq_distance(poly, target_poly(target, st.n))
        return ExperimentRecord(source.describe(seed), "exact_random", st.to_json(), oracle.count,
                                err, EXACT_TOL, err < EXACT_TOL, seed, detail)
    raise ValueError(f"unknown exact mode {st.mode!r}")


def run_exact(source: TargetSource, st: ExactSettings, trials: int, seed: int,
              threads: int | None = None) -> tuple[list[ExperimentRecord], dict]:
    records = pool_map(lambda s: exact_trial(source, st, s), range(seed, seed + trials), threads)
    records.sort(key=lambda r: r.seed)
    agg = aggregate(records)
    agg["success_rate"] = 1.0 - agg["failure_fraction"]
    if st.mode == "queries":
        agg["q_exact"] = binomial_sum(st.n, st.d)
        agg["passed"] = agg["failures"] == 0
    else:
        q = st.resolved_budget()
        k = binomial_sum(st.n, st.d)
        bound = injectivity_failure_bound(q, k, st.d)
        se = math.sqrt(bound * (1 - bound) / max(1, agg["trials"]))
        agg.update(budget=q, failure_bound=bound,
                   within_bound=agg["failure_fraction"] <= bound + 3 * se,
                   passed=agg["success_rate"] >= 1 - st.delta)
    return records, agg


# ---------------------------------------------------------------- pack

def run_pack(n: int, d: int, eps: float, seed: int, verify: str = "formula") -> dict:
    cert = packing_family(n, d, eps, seed, verify=verify)
    return cert.to_json()


# ---------------------------------------------------------------- bench

@dataclass(frozen=True)
class BenchSettings:
    d: int
    eps: float
    delta: float
    m: int
    trials: int
    q0: int = 16
    kind: str = "walsh"

    def to_json(self) -> dict:
        return {"d": self.d, "eps": self.eps, "delta": self.delta, "m": self.m,
                "trials": self.trials, "q0": self.q0, "target": self.kind}


def _bench_trial(n: int, st: BenchSettings, q: int, seed: int) -> bool:
    target = GenSpec(st.kind, n, st.d, seed=seed).build()
    oracle = QueryOracle(target, n)
    cfg = ThresholdConfig(n, st.d, st.m, st.eps, st.delta)
    report = learn_sparse(oracle, cfg, seed, num_samples=q, abort_budget=cfg.error_budget)
    if report.aborted:
        return False
    return sq_distance(report.hypothesis, target_poly(target, n)) <= cfg.error_budget


def _passes(n: int, st: BenchSettings, q: int, seed: int, threads: int) -> tuple[bool, int, int]:
    """Run trials in seed order, stopping once failures exceed delta * trials.

    Returns (passed, failures counted, trials counted); trials are evaluated
    in batches but counted strictly in seed order, so the answer does not
    depend on the pool size.
    """
    allowed = math.floor(st.delta * st.trials * (1 + 1e-12))
    failures = 0
    batch = max(threads, 1) * 4
    done = 0
    while done < st.trials:
        seeds = list(range(seed + done, seed + min(st.trials, done + batch)))
        results = pool_map(lambda s: _bench_trial(n, st, q, s), seeds, threads)
        for ok in results:
            done += 1
            failures += not ok
            if failures > allowed:
                return False, failures, done
    return True, failures, done


def bench_scaling(n_grid: list[int], st: BenchSettings, seed: int, threads: int | None = None) -> list[dict]:
    """Theoretical and empirical sample counts for each n.

    The empirical count is the smallest Q in {q0 * 2^j} whose failure
    fraction over ``trials`` seeds is at most delta, refined by one
    bisection step between that Q and its failing predecessor.  ``q_below``
    is the largest tested count that failed, which brackets the true
    threshold together with ``q_empirical``.
    """
    threads = threads or worker_count()
    rows = []
    for n in n_grid:
        b = math.sqrt(st.eps / (9.0 * st.m))
        q_theory = required_samples(b, n, st.d, st.delta)
        cap = 4 * q_theory
        q, q_below, q_emp, fails_at = st.q0, None, None, None
        while q <= cap:
            ok, fails, _ = _passes(n, st, q, seed, threads)
            if ok:
                q_emp, fails_at = q, fails
                break
            q_below = q
            q *= 2
        if q_emp is not None and q_below is not None:
            mid = (q_below + q_emp) // 2
            if q_below < mid < q_emp:
                ok, fails, _ = _passes(n, st, mid, seed, threads)
                if ok:
                    q_emp, fails_at = mid, fails
                else:
                    q_below = mid
        rows.append({
            "n": n, "log_n": math.log(n), "Q_theory": q_theory, "Q_empirical": q_emp,
            "Q_below": q_below, "failures_at_Q_empirical": fails_at, "trials": st.trials,
        })
    return rows


# ---------------------------------------------------------------- output

def report_document(command: str, config: dict, records=None, aggregate_row=None,
                    extra: dict | None = None, timing: bool = False) -> dict:
    doc = {"command": command, "version": __version__, "config": config}
    if records is not None:
        doc["records"] = [r.to_json(timing) for r in records]
    if aggregate_row is not None:
        doc["aggregate"] = aggregate_row
    if extra:
        doc.update(extra)
    return doc


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def records_csv(records: list[ExperimentRecord], agg: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        note = r.detail.get("failure", "aborted" if r.detail.get("aborted") else "")
        w.writerow(["trial", r.seed, r.learner, r.queries_used,
                    "" if r.sq_error is None else repr(r.sq_error), repr(r.error_budget),
                    int(r.success), note])
    w.writerow(["aggregate", "", records[0].learner if records else "", repr(agg["mean_queries"]),
                "", "", int(agg.get("passed", False)), f"failure_fraction={agg['failure_fraction']!r}"])
    return buf.getvalue()


def rows_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if row.get(c) is None else (repr(row[c]) if isinstance(row[c], float) else row[c])
                    for c in columns])
    return buf.getvalue()


__all__ = [
    "BenchSettings", "ExactSettings", "ExperimentRecord", "LearnSettings", "TargetSource",
    "aggregate", "auto_m", "bench_scaling", "dumps_json", "exact_trial", "learn_trial", "load_target",
    "pool_map", "records_csv", "report_document", "rows_csv", "run_exact",
    "run_learn", "run_pack", "worker_count",
]
