"""Command-line front end: ``lowdeg {learn,exact,pack,bounds,bench}``.

Exit codes: 0 when the run meets its own acceptance rule, 1 when it does
not, 2 for invalid input, 3 when a construction or bound cannot be produced.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bounds import UPPER_KINDS, BoundParams, MissingConstant, bound_table, paper_plausible, q_exact, q_lower
from .harness import (BenchSettings, ExactSettings, LearnSettings, TargetSource, bench_scaling, dumps_json,
                      records_csv, report_document, rows_csv, run_exact, run_learn, run_pack)
from .packing import ConstructionFailed

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_UNAVAILABLE = 0, 1, 2, 3


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _unit(text: str) -> float:
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return value


def _m_value(text: str):
    return None if text == "auto" else _positive_int(text)


def _int_list(text: str) -> list[int]:
    return [_positive_int(v) for v in text.replace(" ", "").split(",") if v]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed + i")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--timing", action="store_true", help="include per-trial wall time (breaks byte-identical reruns)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="lowdeg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", parents=[common], help="run a random-example learner over seeded trials")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=_unit, required=True)
    p.add_argument("--delta", type=_unit, required=True)
    p.add_argument("--m", type=_m_value, default=None, help="family size, or 'auto' to read it off the target")
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--trials", type=_positive_int, default=1)
    p.add_argument("--learner", choices=("sparse", "lmn"), default="sparse")
    p.add_argument("--target", default="gen:walsh", help="gen:<kind>[:key=value,...] or file:<path>")
    p.add_argument("--num-samples", type=_positive_int, help="override the theoretical sample count")
    p.add_argument("--abort", action="store_true", help="stop a scan once the selection provably fails")

    p = sub.add_parser("exact", parents=[common], help="run a zero-error learner")
    p.add_argument("--mode", choices=("queries", "random"), required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=_unit, default=0.1)
    p.add_argument("--budget-constant", type=float, default=4.0)
    p.add_argument("--budget", type=_positive_int)
    p.add_argument("--verify", default="auto", help="degree check: auto, full, none, or a point count")
    p.add_argument("--trials", type=_positive_int, default=1)
    p.add_argument("--target", default="gen:sparse_poly")

    p = sub.add_parser("pack", parents=[common], help="build and certify a packing of degree-d Boolean functions")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--d", type=_positive_int, required=True)
    p.add_argument("--eps", type=_unit, required=True)
    p.add_argument("--verify", choices=("formula", "exhaustive"), default="formula")

    p = sub.add_parser("bounds", parents=[common], help="evaluate closed-form query bounds")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=_unit)
    p.add_argument("--m", type=_positive_int)
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--s", type=float)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--B-d", dest="B_d", type=float)
    p.add_argument("--const", action="append", default=[], metavar="NAME=VALUE",
                   help=f"universal constant; names: {', '.join(sorted({c for c in UPPER_KINDS.values() if c}))}")
    p.add_argument("--o1", help="exponent corrections a,b for the robust Boolean bound")
    p.add_argument("--profile", choices=("explicit", "paper-plausible"), default="explicit")
    p.add_argument("--kinds", help="comma-separated subset of: " + ", ".join(UPPER_KINDS))

    p = sub.add_parser("bench", parents=[common], help="theoretical vs empirical sample counts across n")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=_unit, required=True)
    p.add_argument("--delta", type=_unit, required=True)
    p.add_argument("--m", type=_positive_int, default=1)
    p.add_argument("--n-grid", type=_int_list, required=True, help="comma-separated dimensions")
    p.add_argument("--trials", type=_positive_int, default=200)
    p.add_argument("--q0", type=_positive_int, default=16)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _verify_arg(text: str):
    if text in ("auto", "full"):
        return text
    if text == "none":
        return None
    return _positive_int(text)


def cmd_learn(args) -> int:
    source = TargetSource.parse(args.target, args.n, args.d)
    st = LearnSettings(args.learner, args.n, args.d, args.eps, args.delta, args.m,
                       eta=args.eta, t=args.t, num_samples=args.num_samples, abort=args.abort)
    records, agg = run_learn(source, st, args.trials, args.seed)
    if args.format == "csv":
        _emit(records_csv(records, agg), args.out)
    else:
        config = dict(st.to_json(), target=args.target, trials=args.trials, seed=args.seed)
        _emit(dumps_json(report_document("learn", config, records, agg, timing=args.timing)), args.out)
    return EXIT_OK if agg["passed"] else EXIT_FAILED


def cmd_exact(args) -> int:
    source = TargetSource.parse(args.target, args.n, args.d)
    st = ExactSettings(args.mode, args.n, args.d, args.delta, args.budget_constant, args.budget,
                       _verify_arg(args.verify))
    records, agg = run_exact(source, st, args.trials, args.seed)
    if args.format == "csv":
        _emit(records_csv(records, agg), args.out)
    else:
        config = dict(st.to_json(), target=args.target, trials=args.trials, seed=args.seed)
        _emit(dumps_json(report_document("exact", config, records, agg, timing=args.timing)), args.out)
    return EXIT_OK if agg["passed"] else EXIT_FAILED


def cmd_pack(args) -> int:
    cert = run_pack(args.n, args.d, args.eps, args.seed, args.verify)
    if args.format == "csv":
        rows = [{"index": i, "sigma": " ".join(map(str, s))} for i, s in enumerate(cert["sigmas"])]
        head = "".join(f"# {k}={cert[k]!r}\n" for k in sorted(cert) if k != "sigmas")
        _emit(head + rows_csv(rows, ["index", "sigma"]), args.out)
    else:
        config = {"n": args.n, "d": args.d, "eps": args.eps, "seed": args.seed, "verify": args.verify}
        _emit(dumps_json(report_document("pack", config, extra={"certificate": cert})), args.out)
    return EXIT_OK


def _bound_params(args) -> BoundParams:
    consts = {}
    for item in args.const:
        name, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"--const expects NAME=VALUE, got {item!r}")
        consts[name] = float(value)
    o1 = None
    if args.o1:
        a, b = (float(v) for v in args.o1.split(","))
        o1 = (a, b)
    params = BoundParams(args.n, args.d, args.eps, args.delta, args.eta, args.t, args.m, args.k, args.s,
                         args.B_d, consts, o1)
    return paper_plausible(params) if args.profile == "paper-plausible" else params


def cmd_bounds(args) -> int:
    params = _bound_params(args)
    kinds = [k for k in args.kinds.split(",") if k] if args.kinds else None
    for k in kinds or []:
        if k not in UPPER_KINDS:
            raise ValueError(f"unknown bound kind {k!r}")
    rows = bound_table(params, kinds)
    rows.append({"kind": "q_exact", "value": float(q_exact(args.n, args.d)), "profile": params.profile,
                 "profile_dependent": False, "missing": None})
    rows.append({"kind": "lower_det", "value": q_lower(params), "profile": params.profile,
                 "profile_dependent": False, "missing": None})
    if params.delta is not None:
        rows.append({"kind": "lower_rand", "value": q_lower(params, randomized=True), "profile": params.profile,
                     "profile_dependent": False, "missing": None})
    if args.format == "csv":
        _emit(rows_csv(rows, ["kind", "value", "profile", "profile_dependent", "missing"]), args.out)
    else:
        _emit(dumps_json(report_document("bounds", params.to_json(), extra={"rows": rows})), args.out)
    if kinds and any(r["missing"] for r in rows):
        missing = sorted({r["missing"] for r in rows if r["missing"]})
        print(f"lowdeg: missing inputs: {', '.join(missing)}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    return EXIT_OK


def cmd_bench(args) -> int:
    st = BenchSettings(args.d, args.eps, args.delta, args.m, args.trials, args.q0)
    rows = bench_scaling(args.n_grid, st, args.seed)
    cols = ["n", "log_n", "Q_theory", "Q_empirical", "Q_below", "failures_at_Q_empirical", "trials"]
    if args.format == "csv":
        _emit(rows_csv(rows, cols), args.out)
    else:
        config = dict(st.to_json(), n_grid=args.n_grid, seed=args.seed)
        _emit(dumps_json(report_document("bench", config, extra={"rows": rows})), args.out)
    ok = all(r["Q_empirical"] is not None and r["Q_empirical"] <= r["Q_theory"] for r in rows)
    return EXIT_OK if ok else EXIT_FAILED


COMMANDS = {"learn": cmd_learn, "exact": cmd_exact, "pack": cmd_pack, "bounds": cmd_bounds, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConstructionFailed as exc:
        print(f"lowdeg: construction failed after {exc.retries} retries: {exc}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    except MissingConstant as exc:
        print(f"lowdeg: {exc}", file=sys.stderr)
        return EXIT_UNAVAILABLE
    except (ValueError, OverflowError, MemoryError) as exc:
        print(f"lowdeg: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
