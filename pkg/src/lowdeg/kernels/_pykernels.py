"""Pure numpy versions of the compiled kernels.

Traversal order and truncation behaviour match ``_ckernels`` exactly, so the
two backends emit the same subsets in the same order; only the summation
order of the real-valued scan differs.
"""
from __future__ import annotations

import numpy as np


def fwht(a: np.ndarray) -> None:
    """Unnormalized in-place Walsh-Hadamard butterfly on a length-2^n array."""
    size = a.shape[0]
    h = 1
    while h < size:
        v = a.reshape(-1, 2, h)
        x = v[:, 0, :].copy()
        y = v[:, 1, :]
        v[:, 0, :] += y
        v[:, 1, :] = x - y
        h *= 2


class _Out:
    def __init__(self, cap, width, dtype):
        self.vars = np.full((cap, width), -1, dtype=np.int32)
        self.stat = np.zeros(cap, dtype=dtype)
        self.cap = cap
        self.nout = 0
        self.truncated = False

    def record(self, prefix, stat) -> bool:
        if self.nout >= self.cap:
            self.truncated = True
            return False
        self.vars[self.nout, : len(prefix)] = prefix
        self.stat[self.nout] = stat
        self.nout += 1
        return True

    def record_many(self, prefix, ks, stats) -> bool:
        room = self.cap - self.nout
        take = min(room, len(ks))
        if take:
            sl = slice(self.nout, self.nout + take)
            self.vars[sl, : len(prefix)] = prefix
            self.vars[sl, len(prefix)] = ks[:take]
            self.stat[sl] = stats[:take]
            self.nout += take
        if take < len(ks):
            self.truncated = True
            return False
        return True

    def result(self):
        return self.vars[: self.nout], self.stat[: self.nout], self.truncated


def spectrum_bits(cols, ybits, d, keep, cap):
    n = cols.shape[0]
    keep = np.asarray(keep, dtype=bool)
    out = _Out(cap, max(d, 1), np.int64)
    c0 = int(np.bitwise_count(ybits).sum())
    if keep[c0]:
        out.record([], c0)
    if d > 0 and not out.truncated:
        _bits_walk(cols, ybits, d, keep, out, [], 0, n)
    return out.result()


def _bits_walk(cols, par, d, keep, out, prefix, start, n) -> bool:
    if start >= n:
        return True
    block = np.bitwise_xor(cols[start:], par)
    counts = np.bitwise_count(block).sum(axis=1, dtype=np.int64)
    if len(prefix) + 1 == d:
        hit = np.flatnonzero(keep[counts])
        return out.record_many(prefix, hit + start, counts[hit])
    for off in range(n - start):
        k = start + off
        if keep[counts[off]]:
            if not out.record(prefix + [k], counts[off]):
                return False
        if not _bits_walk(cols, block[off], d, keep, out, prefix + [k], k + 1, n):
            return False
    return True


def spectrum_real(signs, y, d, thr, cap):
    n, q = signs.shape[0], y.shape[0]
    out = _Out(cap, max(d, 1), np.float64)
    t0 = float(np.sum(y))
    if abs(t0 / q) >= thr:
        out.record([], t0)
    if d > 0 and not out.truncated:
        _real_walk(signs, y, d, thr, q, out, [], 0, n)
    return out.result()


def _real_walk(signs, par, d, thr, q, out, prefix, start, n) -> bool:
    if start >= n:
        return True
    totals = signs[start:] @ par
    hits = np.abs(totals / q) >= thr
    if len(prefix) + 1 == d:
        hit = np.flatnonzero(hits)
        return out.record_many(prefix, hit + start, totals[hit])
    for off in range(n - start):
        k = start + off
        if hits[off]:
            if not out.record(prefix + [k], totals[off]):
                return False
        if not _real_walk(signs, par * signs[k], d, thr, q, out, prefix + [k], k + 1, n):
            return False
    return True
