"""Compare the compiled kernels with the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat R] [--quick]

For each workload both backends run on identical inputs; outputs are checked
for equality before timings are reported.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from lowdeg import _rng
from lowdeg.cube import pack_signs, transpose_bits
from lowdeg.kernels import compiled, fallback


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bits_workload(n: int, q: int, d: int, seed: int = 0):
    rng = _rng.generator(seed, _rng.SAMPLES)
    points = _rng.uniform_points(rng, q, n)
    cols = transpose_bits(points, n)
    y = np.where(np.random.default_rng(seed).random(q) < 0.5, -1.0, 1.0)
    alpha = (q - 2 * np.arange(q + 1)) / q
    keep = (np.abs(alpha) >= 0.2).astype(np.uint8)
    return cols, pack_signs(y), d, keep, 1 << 20


def real_workload(n: int, q: int, d: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    signs = np.where(rng.random((n, q)) < 0.5, -1.0, 1.0)
    y = rng.uniform(-1, 1, q)
    return np.ascontiguousarray(signs), y, d, 0.1, 1 << 20


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args()
    if compiled is None:
        raise SystemExit("compiled extension is not built; run `pip install -e . --no-build-isolation`")

    scale = 4 if args.quick else 1
    cases = [
        ("fwht n=20", "fwht", (1 << (20 - scale),)),
        ("spectrum_bits n=2048 Q=1024 d=2", "bits", (2048 // scale, 1024, 2)),
        ("spectrum_bits n=256 Q=512 d=3", "bits", (256 // scale, 512, 3)),
        ("spectrum_real n=512 Q=512 d=2", "real", (512 // scale, 512, 2)),
    ]
    print(f"{'workload':<36}{'compiled (s)':>14}{'numpy (s)':>12}{'speedup':>10}")
    for label, kind, params in cases:
        if kind == "fwht":
            base = np.random.default_rng(0).standard_normal(params[0])
            a, b = base.copy(), base.copy()
            compiled.fwht(a)
            fallback.fwht(b)
            assert np.allclose(a, b)
            tc = best_of(lambda: compiled.fwht(base.copy()), args.repeat)
            tp = best_of(lambda: fallback.fwht(base.copy()), args.repeat)
        else:
            work = bits_workload(*params) if kind == "bits" else real_workload(*params)
            fc = compiled.spectrum_bits if kind == "bits" else compiled.spectrum_real
            fp = fallback.spectrum_bits if kind == "bits" else fallback.spectrum_real
            rc, rp = fc(*work), fp(*work)
            assert np.array_equal(rc[0], rp[0]) and np.allclose(rc[1], rp[1]) and rc[2] == rp[2]
            tc = best_of(lambda: fc(*work), args.repeat)
            tp = best_of(lambda: fp(*work), args.repeat)
        print(f"{label:<36}{tc:>14.4f}{tp:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
