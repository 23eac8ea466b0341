"""Independent reference implementations used only by the tests.

None of these share code with the package: field multiplication is
carry-less product followed by long division, interpolation is Gaussian
elimination on a Vandermonde system, consistency counting enumerates
polynomials with itertools, and HKDF is written against hmac/hashlib.
"""

import hashlib
import hmac
import itertools


def clmul(a, b):
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def polymod(a, f):
    df = f.bit_length()
    while a.bit_length() >= df:
        a ^= f << (a.bit_length() - df)
    return a


def gf_mul(a, b, f):
    return polymod(clmul(a, b), f)


def gf_inv_search(a, f):
    bits = f.bit_length() - 1
    for b in range(1, 1 << bits):
        if gf_mul(a, b, f) == 1:
            return b
    raise ZeroDivisionError


def gf_pow(a, e, f):
    acc = 1
    for _ in range(e):
        acc = gf_mul(acc, a, f)
    return acc


def gf_eval(coeffs, x, f):
    acc, xp = 0, 1
    for c in coeffs:
        acc ^= gf_mul(c, xp, f)
        xp = gf_mul(xp, x, f)
    return acc


def gf_solve_vandermonde(xs, ys, f):
    """Coefficients c with sum c_j x_i^j = y_i, by Gauss-Jordan elimination."""
    n = len(xs)
    rows = []
    for x, y in zip(xs, ys):
        row, xp = [], 1
        for _ in range(n):
            row.append(xp)
            xp = gf_mul(xp, x, f)
        rows.append(row + [y])
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col])
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = gf_inv_search(rows[col][col], f)
        rows[col] = [gf_mul(v, inv, f) for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [v ^ gf_mul(factor, p, f) for v, p in zip(rows[r], rows[col])]
    return [rows[i][n] for i in range(n)]


def brute_counts(points, r, m, bits, f):
    """{secret: count} over every degree-(m-1) polynomial through ``points``.

    ``points`` is a list of (x, y); the secret is the tuple of coefficients
    r..m-1 (low to high).
    """
    size = 1 << bits
    counts = {}
    for coeffs in itertools.product(range(size), repeat=m):
        secret = coeffs[r:]
        ok = all(gf_eval(coeffs, x, f) == y for x, y in points)
        counts[secret] = counts.get(secret, 0) + (1 if ok else 0)
    return counts


def brute_joint_counts(groups, r, m, bits, f):
    """Joint count for shares of several epochs.

    Each group is a list of (x, y) from one epoch's polynomial. All epochs
    share the high coefficients and have independent low coefficients, so
    this enumerates a shared secret plus one low block per epoch.
    """
    size = 1 << bits
    counts = {}
    for secret in itertools.product(range(size), repeat=m - r):
        total = 0
        for lows in itertools.product(itertools.product(range(size), repeat=r), repeat=len(groups)):
            if all(
                gf_eval(list(low) + list(secret), x, f) == y
                for low, pts in zip(lows, groups)
                for x, y in pts
            ):
                total += 1
        counts[secret] = total
    return counts


def hkdf(ikm, salt, info, length):
    """HKDF-SHA256 extract-then-expand from its definition."""
    prk = hmac.new(salt or b"\x00" * 32, ikm, hashlib.sha256).digest()
    out, block = b"", b""
    i = 1
    while len(out) < length:
        block = hmac.new(prk, block + info + bytes([i]), hashlib.sha256).digest()
        out += block
        i += 1
    return out[:length]
