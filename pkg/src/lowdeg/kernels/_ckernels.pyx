# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: butterfly WHT and the shared-sample spectrum scans.

Both spectrum scans walk the subsets of size <= d depth-first in
lexicographic order, reusing the parity vector of each prefix, and must
emit subsets in exactly the order of the numpy fallback.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

cnp.import_array()

cdef extern from *:
    int popcount64 "__builtin_popcountll"(unsigned long long) nogil


def fwht(double[::1] a):
    """Unnormalized in-place Walsh-Hadamard butterfly on a length-2^n array."""
    cdef Py_ssize_t size = a.shape[0]
    cdef Py_ssize_t h = 1, i, j
    cdef double x, y
    with nogil:
        while h < size:
            i = 0
            while i < size:
                for j in range(i, i + h):
                    x = a[j]
                    y = a[j + h]
                    a[j] = x + y
                    a[j + h] = x - y
                i += 2 * h
            h *= 2


cdef struct BitScan:
    const uint64_t* cols
    uint64_t* stack
    const uint8_t* keep
    int32_t* out_vars
    int64_t* out_cnt
    int32_t* prefix
    Py_ssize_t n
    Py_ssize_t words
    int d
    Py_ssize_t cap
    Py_ssize_t nout
    bint truncated


cdef inline bint _bit_record(BitScan* s, int size, int64_t c) noexcept nogil:
    cdef int t
    if s.nout >= s.cap:
        s.truncated = True
        return False
    for t in range(s.d):
        s.out_vars[s.nout * s.d + t] = s.prefix[t] if t < size else -1
    s.out_cnt[s.nout] = c
    s.nout += 1
    return True


cdef bint _bit_walk(BitScan* s, int depth, Py_ssize_t start) noexcept nogil:
    cdef Py_ssize_t k, w
    cdef Py_ssize_t W = s.words
    cdef const uint64_t* par = s.stack + depth * W
    cdef uint64_t* child = s.stack + (depth + 1) * W
    cdef const uint64_t* col
    cdef int64_t c
    if depth + 1 == s.d:
        for k in range(start, s.n):
            col = s.cols + k * W
            c = 0
            for w in range(W):
                c += popcount64(par[w] ^ col[w])
            if s.keep[c]:
                s.prefix[depth] = <int32_t>k
                if not _bit_record(s, depth + 1, c):
                    return False
        return True
    for k in range(start, s.n):
        col = s.cols + k * W
        c = 0
        for w in range(W):
            child[w] = par[w] ^ col[w]
            c += popcount64(child[w])
        s.prefix[depth] = <int32_t>k
        if s.keep[c]:
            if not _bit_record(s, depth + 1, c):
                return False
        if not _bit_walk(s, depth + 1, k + 1):
            return False
    return True


def spectrum_bits(const uint64_t[:, ::1] cols, const uint64_t[::1] ybits, int d,
                  const uint8_t[::1] keep, Py_ssize_t cap):
    """Scan all subsets of size <= d for +/-1 labels packed as bits.

    ``cols[i]`` holds bit j set iff sample j has x_{i+1} = -1; ``ybits`` has
    bit j set iff the label of sample j is -1.  For each subset the number of
    samples where label * w_S = -1 is counted; subsets whose count c has
    ``keep[c]`` are emitted.  Returns ``(vars, counts, truncated)`` where
    ``vars`` rows are 0-based indices padded with -1.
    """
    cdef Py_ssize_t n = cols.shape[0]
    cdef Py_ssize_t W = ybits.shape[0]
    cdef int width = d if d > 0 else 1
    out_vars = np.full((cap, width), -1, dtype=np.int32)
    out_cnt = np.zeros(cap, dtype=np.int64)
    stack = np.zeros((d + 1, W), dtype=np.uint64)
    prefix = np.zeros(width, dtype=np.int32)
    stack[0, :] = ybits
    cdef int32_t[:, ::1] ov = out_vars
    cdef int64_t[::1] oc = out_cnt
    cdef uint64_t[:, ::1] st = stack
    cdef int32_t[::1] pv = prefix
    cdef BitScan s
    cdef int64_t c0 = 0
    cdef Py_ssize_t w
    s.cols = &cols[0, 0] if n > 0 else NULL
    s.stack = &st[0, 0]
    s.keep = &keep[0]
    s.out_vars = &ov[0, 0] if cap > 0 else NULL
    s.out_cnt = &oc[0] if cap > 0 else NULL
    s.prefix = &pv[0]
    s.n = n
    s.words = W
    s.d = width
    s.cap = cap
    s.nout = 0
    s.truncated = False
    with nogil:
        for w in range(W):
            c0 += popcount64(st[0, w])
        if keep[c0]:
            _bit_record(&s, 0, c0)
        if d > 0 and not s.truncated:
            _bit_walk(&s, 0, 0)
    return out_vars[:s.nout], out_cnt[:s.nout], bool(s.truncated)


cdef struct RealScan:
    const double* signs
    double* stack
    int32_t* out_vars
    double* out_sum
    int32_t* prefix
    Py_ssize_t n
    Py_ssize_t q
    int d
    double inv_q
    double thr
    Py_ssize_t cap
    Py_ssize_t nout
    bint truncated


cdef inline bint _real_record(RealScan* s, int size, double total) noexcept nogil:
    cdef int t
    if s.nout >= s.cap:
        s.truncated = True
        return False
    for t in range(s.d):
        s.out_vars[s.nout * s.d + t] = s.prefix[t] if t < size else -1
    s.out_sum[s.nout] = total
    s.nout += 1
    return True


cdef inline bint _real_keep(RealScan* s, double total) noexcept nogil:
    cdef double a = total / <double>s.q
    if a < 0:
        a = -a
    return a >= s.thr


cdef inline double _dot(const double* a, const double* b, Py_ssize_t q) noexcept nogil:
    # Eight independent partial sums let the loop pipeline and vectorize.
    cdef double acc[8]
    cdef Py_ssize_t j, t
    cdef Py_ssize_t body = q - q % 8
    for t in range(8):
        acc[t] = 0.0
    for j in range(0, body, 8):
        for t in range(8):
            acc[t] += a[j + t] * b[j + t]
    for j in range(body, q):
        acc[0] += a[j] * b[j]
    return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))


cdef bint _real_walk(RealScan* s, int depth, Py_ssize_t start) noexcept nogil:
    cdef Py_ssize_t k, j
    cdef Py_ssize_t Q = s.q
    cdef const double* par = s.stack + depth * Q
    cdef double* child = s.stack + (depth + 1) * Q
    cdef const double* sg
    cdef double total
    if depth + 1 == s.d:
        for k in range(start, s.n):
            sg = s.signs + k * Q
            total = _dot(par, sg, Q)
            if _real_keep(s, total):
                s.prefix[depth] = <int32_t>k
                if not _real_record(s, depth + 1, total):
                    return False
        return True
    for k in range(start, s.n):
        sg = s.signs + k * Q
        total = 0.0
        for j in range(Q):
            child[j] = par[j] * sg[j]
            total += child[j]
        s.prefix[depth] = <int32_t>k
        if _real_keep(s, total):
            if not _real_record(s, depth + 1, total):
                return False
        if not _real_walk(s, depth + 1, k + 1):
            return False
    return True


def spectrum_real(const double[:, ::1] signs, const double[::1] y, int d,
                  double thr, Py_ssize_t cap):
    """Scan all subsets of size <= d for real labels.

    ``signs[i, j]`` is x_{i+1} of sample j as +/-1.0.  A subset is emitted
    when ``|sum_j y_j w_S(X_j)| / Q >= thr``.  Returns ``(vars, sums,
    truncated)``.
    """
    cdef Py_ssize_t n = signs.shape[0]
    cdef Py_ssize_t Q = y.shape[0]
    cdef int width = d if d > 0 else 1
    out_vars = np.full((cap, width), -1, dtype=np.int32)
    out_sum = np.zeros(cap, dtype=np.float64)
    stack = np.zeros((d + 1, Q), dtype=np.float64)
    prefix = np.zeros(width, dtype=np.int32)
    stack[0, :] = y
    cdef int32_t[:, ::1] ov = out_vars
    cdef double[::1] os = out_sum
    cdef double[:, ::1] st = stack
    cdef int32_t[::1] pv = prefix
    cdef RealScan s
    cdef double t0 = 0.0
    cdef Py_ssize_t j
    s.signs = &signs[0, 0] if n > 0 else NULL
    s.stack = &st[0, 0]
    s.out_vars = &ov[0, 0] if cap > 0 else NULL
    s.out_sum = &os[0] if cap > 0 else NULL
    s.prefix = &pv[0]
    s.n = n
    s.q = Q
    s.d = width
    s.thr = thr
    s.cap = cap
    s.nout = 0
    s.truncated = False
    with nogil:
        for j in range(Q):
            t0 += st[0, j]
        if _real_keep(&s, t0):
            _real_record(&s, 0, t0)
        if d > 0 and not s.truncated:
            _real_walk(&s, 0, 0)
    return out_vars[:s.nout], out_sum[:s.nout], bool(s.truncated)
