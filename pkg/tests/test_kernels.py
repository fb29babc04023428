"""The compiled kernels and the numpy fallback must agree exactly."""
import os
import subprocess
import sys

import numpy as np
import pytest

from lowdeg import _rng, kernels
from lowdeg.cube import pack_signs, transpose_bits
from lowdeg.kernels import compiled, fallback

needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def bit_inputs(n, q, d, thr, cap, seed):
    pts = _rng.uniform_points(_rng.generator(seed, _rng.SAMPLES), q, n)
    y = np.where(np.random.default_rng(seed).random(q) < 0.5, -1.0, 1.0)
    alpha = (q - 2 * np.arange(q + 1)) / q
    keep = (np.abs(alpha) >= thr).astype(np.uint8)
    return transpose_bits(pts, n), pack_signs(y), d, keep, cap


def brute_bits(cols, ybits, n, q, d, keep):
    """Dict subset-tuple -> count of -1 products, straight from the bitsets."""
    from itertools import combinations

    out = {}
    for r in range(d + 1):
        for S in combinations(range(n), r):
            acc = ybits.copy()
            for i in S:
                acc ^= cols[i]
            c = int(np.bitwise_count(acc).sum())
            if keep[c]:
                out[S] = c
    return out


class TestFallback:
    @pytest.mark.parametrize("n,q,d", [(7, 40, 2), (10, 130, 3), (5, 64, 5), (9, 1, 1), (6, 20, 0)])
    def test_bits_scan_matches_brute_force(self, n, q, d):
        args = bit_inputs(n, q, d, 0.1, 10**6, seed=n + q)
        rows, counts, truncated = fallback.spectrum_bits(*args)
        got = {tuple(v for v in row if v >= 0): int(c) for row, c in zip(rows.tolist(), counts)}
        assert not truncated
        assert got == brute_bits(args[0], args[1], n, q, d, args[3])

    def test_truncation_stops_at_cap(self):
        args = bit_inputs(8, 16, 2, 0.0, 5, seed=0)
        rows, counts, truncated = fallback.spectrum_bits(*args)
        assert truncated and len(rows) == 5
        assert rows[0].tolist() == [-1, -1] and rows[1].tolist() == [0, -1] and rows[2].tolist() == [0, 1]


@needs_compiled
class TestEquivalence:
    @pytest.mark.parametrize("n,q,d,thr", [(64, 200, 2, 0.15), (130, 257, 2, 0.2), (20, 100, 3, 0.0),
                                           (12, 64, 4, 0.3), (300, 1024, 1, 0.05)])
    def test_bits(self, n, q, d, thr):
        args = bit_inputs(n, q, d, thr, 10**6, seed=q)
        a, b = compiled.spectrum_bits(*args), fallback.spectrum_bits(*args)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]) and a[2] == b[2]

    @pytest.mark.parametrize("cap", [0, 1, 7, 100])
    def test_bits_truncation(self, cap):
        args = bit_inputs(30, 50, 2, 0.0, cap, seed=cap)
        a, b = compiled.spectrum_bits(*args), fallback.spectrum_bits(*args)
        assert np.array_equal(a[0], b[0]) and a[2] == b[2]

    @pytest.mark.parametrize("n,q,d,thr,cap", [(40, 77, 2, 0.1, 10**5), (15, 33, 3, 0.0, 10**5), (50, 64, 2, 0.0, 9)])
    def test_real(self, n, q, d, thr, cap):
        rng = np.random.default_rng(n)
        signs = np.ascontiguousarray(np.where(rng.random((n, q)) < 0.5, -1.0, 1.0))
        y = rng.uniform(-1, 1, q)
        a = compiled.spectrum_real(signs, y, d, thr, cap)
        b = fallback.spectrum_real(signs, y, d, thr, cap)
        assert np.array_equal(a[0], b[0]) and a[2] == b[2]
        assert np.allclose(a[1], b[1], atol=1e-12)

    def test_fwht(self):
        base = np.random.default_rng(0).standard_normal(1 << 12)
        a, b = base.copy(), base.copy()
        compiled.fwht(a)
        fallback.fwht(b)
        assert np.allclose(a, b, atol=1e-9)


class TestBackendSelection:
    def test_active_backend_name(self):
        assert kernels.BACKEND == ("compiled" if compiled is not None else "numpy")

    def test_env_forces_fallback(self):
        env = dict(os.environ, LOWDEG_PURE_PYTHON="1")
        out = subprocess.run([sys.executable, "-c", "from lowdeg import kernels; print(kernels.BACKEND)"],
                             env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "numpy"
