# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(2^L) kernels, L <= 64. Mirrors ``_purekernels``."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport malloc, calloc, free


cdef inline uint64_t _mul(uint64_t a, uint64_t b, int bits, uint64_t low) noexcept nogil:
    cdef uint64_t top = (<uint64_t>1) << (bits - 1)
    cdef uint64_t mask = top | (top - 1)
    cdef uint64_t res = 0
    while b:
        if b & 1:
            res ^= a
        b >>= 1
        if a & top:
            a = ((a << 1) & mask) ^ low
        else:
            a = a << 1
    return res


cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil


cdef inline int _deg(uint64_t x) noexcept nogil:
    return 63 - __builtin_clzll(x)


cdef inline uint64_t _inv(uint64_t a, int bits, uint64_t low) noexcept nogil:
    # binary extended Euclid; the modulus needs bits+1 bits, so the first
    # reduction step (which cancels its top term) is done by hand
    cdef uint64_t mask = ((<uint64_t>1) << (bits - 1) << 1) - 1
    cdef uint64_t u, v, g1, g2, t
    cdef int j
    if a == 1:
        return 1
    j = bits - _deg(a)
    u = low ^ ((a << j) & mask)
    v = a
    g1 = (<uint64_t>1) << j
    g2 = 1
    while u != 1:
        j = _deg(u) - _deg(v)
        if j < 0:
            t = u; u = v; v = t
            t = g1; g1 = g2; g2 = t
            j = -j
        u ^= v << j
        g1 ^= g2 << j
    return g1


cdef inline uint64_t _horner(const uint64_t* c, int n, uint64_t x, int bits, uint64_t low) noexcept nogil:
    cdef uint64_t acc = 0
    cdef int j
    for j in range(n - 1, -1, -1):
        acc = _mul(acc, x, bits, low) ^ c[j]
    return acc


cdef uint64_t* _to_array(seq, int n) except NULL:
    cdef uint64_t* arr = <uint64_t*>malloc((n if n > 0 else 1) * sizeof(uint64_t))
    if arr == NULL:
        raise MemoryError()
    cdef int i
    for i in range(n):
        arr[i] = seq[i]
    return arr


def mul(uint64_t a, uint64_t b, int bits, uint64_t low):
    return _mul(a, b, bits, low)


def inv(uint64_t a, int bits, uint64_t low):
    return _inv(a, bits, low)


def poly_eval(coeffs, uint64_t x, int bits, uint64_t low):
    cdef int n = len(coeffs)
    cdef uint64_t* c = _to_array(coeffs, n)
    cdef uint64_t res
    try:
        res = _horner(c, n, x, bits, low)
    finally:
        free(c)
    return res


def interpolate(xs, ys, int bits, uint64_t low):
    cdef int n = len(xs)
    cdef uint64_t* x = _to_array(xs, n)
    cdef uint64_t* y = NULL
    cdef uint64_t* master = NULL
    cdef uint64_t* q = NULL
    cdef uint64_t* out = NULL
    cdef uint64_t scale, prev, cur
    cdef int i, j
    try:
        y = _to_array(ys, n)
        master = <uint64_t*>calloc(n + 1, sizeof(uint64_t))
        q = <uint64_t*>calloc(n, sizeof(uint64_t))
        out = <uint64_t*>calloc(n, sizeof(uint64_t))
        if master == NULL or q == NULL or out == NULL:
            raise MemoryError()
        with nogil:
            master[0] = 1
            for i in range(n):
                # multiply by (x + x_i) in place, degree i -> i + 1
                prev = 0
                for j in range(i + 2):
                    cur = master[j] if j <= i else 0
                    master[j] = prev ^ _mul(cur, x[i], bits, low)
                    prev = cur
            for i in range(n):
                q[n - 1] = master[n]
                for j in range(n - 1, 0, -1):
                    q[j - 1] = master[j] ^ _mul(x[i], q[j], bits, low)
                scale = _mul(y[i], _inv(_horner(q, n, x[i], bits, low), bits, low), bits, low)
                if scale:
                    for j in range(n):
                        out[j] ^= _mul(scale, q[j], bits, low)
        return [out[j] for j in range(n)]
    finally:
        free(x)
        free(y)
        free(master)
        free(q)
        free(out)


def count_consistent(xs, ys, int r, int m, int bits, uint64_t low):
    cdef int npts = len(xs)
    cdef uint64_t* x = _to_array(xs, npts)
    cdef uint64_t* y = NULL
    cdef uint64_t* c = NULL
    cdef uint64_t* counts = NULL
    cdef uint64_t mask = ((<uint64_t>1) << (bits - 1))
    mask = mask | (mask - 1)
    cdef uint64_t total = (<uint64_t>1) << (bits * m)
    cdef uint64_t ncand = (<uint64_t>1) << (bits * (m - r))
    cdef uint64_t idx
    cdef int j, p
    cdef bint ok
    try:
        y = _to_array(ys, npts)
        c = <uint64_t*>calloc(m, sizeof(uint64_t))
        counts = <uint64_t*>calloc(ncand, sizeof(uint64_t))
        if c == NULL or counts == NULL:
            raise MemoryError()
        with nogil:
            for idx in range(total):
                for j in range(m):
                    c[j] = (idx >> (bits * j)) & mask
                ok = True
                for p in range(npts):
                    if _horner(c, m, x[p], bits, low) != y[p]:
                        ok = False
                        break
                if ok:
                    counts[idx >> (bits * r)] += 1
        return [counts[idx] for idx in range(ncand)]
    finally:
        free(x)
        free(y)
        free(c)
        free(counts)
