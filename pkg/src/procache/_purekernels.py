"""Pure-Python GF(2^L) kernels.

Same call signatures as the compiled ``_ckernels`` module. ``low`` is the
reduction polynomial with its x^L term removed.
"""

from __future__ import annotations


def mul(a: int, b: int, bits: int, low: int) -> int:
    top = 1 << (bits - 1)
    mask = (1 << bits) - 1
    res = 0
    while b:
        if b & 1:
            res ^= a
        b >>= 1
        if a & top:
            a = ((a << 1) & mask) ^ low
        else:
            a <<= 1
    return res


def inv(a: int, bits: int, low: int) -> int:
    # binary extended Euclid; invariant g1*a == u and g2*a == v (mod f)
    u, v = a, (1 << bits) | low
    g1, g2 = 1, 0
    while u != 1:
        j = u.bit_length() - v.bit_length()
        if j < 0:
            u, v = v, u
            g1, g2 = g2, g1
            j = -j
        u ^= v << j
        g1 ^= g2 << j
    return g1


def poly_eval(coeffs, x: int, bits: int, low: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = mul(acc, x, bits, low) ^ c
    return acc


def interpolate(xs, ys, bits: int, low: int) -> list:
    n = len(xs)
    # master polynomial prod (x + x_i), low-to-high
    master = [1]
    for xi in xs:
        nxt = [0] * (len(master) + 1)
        for j, c in enumerate(master):
            nxt[j + 1] ^= c
            nxt[j] ^= mul(c, xi, bits, low)
        master = nxt
    out = [0] * n
    for i in range(n):
        xi = xs[i]
        # synthetic division of master by (x + x_i)
        q = [0] * n
        q[n - 1] = master[n]
        for j in range(n - 1, 0, -1):
            q[j - 1] = master[j] ^ mul(xi, q[j], bits, low)
        denom = poly_eval(q, xi, bits, low)
        scale = mul(ys[i], inv(denom, bits, low), bits, low)
        if scale:
            for j in range(n):
                out[j] ^= mul(scale, q[j], bits, low)
    return out


def count_consistent(xs, ys, r: int, m: int, bits: int, low: int) -> list:
    mask = (1 << bits) - 1
    counts = [0] * (1 << (bits * (m - r)))
    pts = list(zip(xs, ys))
    for idx in range(1 << (bits * m)):
        coeffs = [(idx >> (bits * j)) & mask for j in range(m)]
        for x, y in pts:
            if poly_eval(coeffs, x, bits, low) != y:
                break
        else:
            counts[idx >> (bits * r)] += 1
    return counts
