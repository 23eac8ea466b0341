"""Arithmetic over GF(2^L), 1 <= L <= 64.

Elements are plain ``int`` values in polynomial basis, bit i being the
coefficient of x^i. :class:`GF2m` carries the field parameters and does the
int-level work; :class:`FieldElement` and :class:`FieldPolynomial` are thin
typed wrappers for callers that want parameter checking.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernels
from .errors import CapacityError, ConfigurationError, FieldMismatchError

# Reduction polynomials, full bit pattern including the x^L term. Degrees 3, 8,
# 16 and 64 are the conventional choices; the rest are the lowest-weight
# irreducible trinomial (or pentanomial) of that degree.
REDUCTION_POLYS = {
    1: 0x3, 2: 0x7, 3: 0xB, 4: 0x13, 5: 0x25, 6: 0x43, 7: 0x83, 8: 0x11B,
    9: 0x203, 10: 0x409, 11: 0x805, 12: 0x1009, 13: 0x201B, 14: 0x4021,
    15: 0x8003, 16: 0x1100B, 17: 0x20009, 18: 0x40009, 19: 0x80027,
    20: 0x100009, 21: 0x200005, 22: 0x400003, 23: 0x800021, 24: 0x100001B,
    25: 0x2000009, 26: 0x400001B, 27: 0x8000027, 28: 0x10000003,
    29: 0x20000005, 30: 0x40000003, 31: 0x80000009, 32: 0x10000008D,
    33: 0x200000401, 34: 0x400000081, 35: 0x800000005, 36: 0x1000000201,
    37: 0x2000000053, 38: 0x4000000063, 39: 0x8000000011, 40: 0x10000000039,
    41: 0x20000000009, 42: 0x40000000081, 43: 0x80000000059,
    44: 0x100000000021, 45: 0x20000000001B, 46: 0x400000000003,
    47: 0x800000000021, 48: 0x100000000002D, 49: 0x2000000000201,
    50: 0x400000000001D, 51: 0x800000000004B, 52: 0x10000000000009,
    53: 0x20000000000047, 54: 0x40000000000201, 55: 0x80000000000081,
    56: 0x100000000000095, 57: 0x200000000000011, 58: 0x400000000080001,
    59: 0x800000000000095, 60: 0x1000000000000003, 61: 0x2000000000000027,
    62: 0x4000000020000001, 63: 0x8000000000000003, 64: 0x1000000000000001B,
}

_VERIFY_LIMIT = 16


def _gf2_mod(a: int, b: int) -> int:
    """Remainder of carry-less division a mod b over GF(2)[x]."""
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def is_irreducible(poly: int) -> bool:
    """Trial division by every polynomial of degree 1..deg/2."""
    deg = poly.bit_length() - 1
    if deg < 1:
        return False
    for d in range(1, deg // 2 + 1):
        for cand in range(1 << d, 1 << (d + 1)):
            if _gf2_mod(poly, cand) == 0:
                return False
    return True


class GF2m:
    """Field parameters plus int-level arithmetic.

    >>> f = GF2m(3)
    >>> f.mul(0b010, 0b100)
    3
    """

    __slots__ = ("bits", "poly", "low", "order", "mask")

    def __init__(self, bits: int, poly: int | None = None):
        if not 1 <= bits <= 64:
            raise ConfigurationError(f"field width must be in 1..64, got {bits}")
        if poly is None:
            poly = REDUCTION_POLYS[bits]
        if poly.bit_length() - 1 != bits:
            raise ConfigurationError(f"reduction polynomial {poly:#x} is not of degree {bits}")
        if bits <= _VERIFY_LIMIT and not is_irreducible(poly):
            raise ConfigurationError(f"reduction polynomial {poly:#x} is reducible")
        self.bits = bits
        self.poly = poly
        self.mask = (1 << bits) - 1
        self.low = poly & self.mask
        self.order = 1 << bits

    def __repr__(self) -> str:
        return f"GF2m(bits={self.bits}, poly={self.poly:#x})"

    def __eq__(self, other) -> bool:
        return isinstance(other, GF2m) and (self.bits, self.poly) == (other.bits, other.poly)

    def __hash__(self) -> int:
        return hash((self.bits, self.poly))

    # -- scalar ops --------------------------------------------------------

    def check(self, a: int) -> int:
        if not 0 <= a <= self.mask:
            raise ValueError(f"{a} is not an element of GF(2^{self.bits})")
        return a

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        return kernels.mul(a, b, self.bits, self.low)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no inverse")
        return kernels.inv(a, self.bits, self.low)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        acc = 1
        while e:
            if e & 1:
                acc = self.mul(acc, a)
            a = self.mul(a, a)
            e >>= 1
        return acc

    def random_element(self, rng) -> int:
        return rng.getrandbits(self.bits)

    # -- polynomials (coefficient lists, low-to-high) ----------------------

    def eval_poly(self, coeffs: Sequence[int], x: int) -> int:
        return kernels.poly_eval(coeffs, x, self.bits, self.low)

    def interpolate(self, xs: Sequence[int], ys: Sequence[int]) -> list[int]:
        if len(xs) != len(ys):
            raise ValueError("xs and ys differ in length")
        if not xs:
            raise ValueError("interpolation needs at least one point")
        if len(set(xs)) != len(xs):
            raise ValueError("duplicate x coordinate")
        return kernels.interpolate(list(xs), list(ys), self.bits, self.low)

    def enumerate_points(self, count: int) -> list[int]:
        if count > self.mask:
            raise CapacityError(
                f"GF(2^{self.bits}) has only {self.mask} nonzero elements, {count} requested"
            )
        if count < 0:
            raise ValueError("count must be non-negative")
        return list(range(1, count + 1))


@functools.lru_cache(maxsize=None)
def field_for(bits: int) -> GF2m:
    """Shared field instance using the built-in reduction polynomial."""
    return GF2m(bits)


# -- typed wrappers ---------------------------------------------------------


@dataclass(frozen=True)
class FieldElement:
    value: int
    field: GF2m

    def __post_init__(self):
        self.field.check(self.value)

    def _same(self, other: "FieldElement") -> GF2m:
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise FieldMismatchError("operands belong to different fields")
        return self.field

    def __add__(self, other: "FieldElement") -> "FieldElement":
        f = self._same(other)
        return FieldElement(self.value ^ other.value, f)

    __sub__ = __add__

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        f = self._same(other)
        return FieldElement(f.mul(self.value, other.value), f)

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        f = self._same(other)
        return FieldElement(f.div(self.value, other.value), f)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field.inv(self.value), self.field)

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class FieldPolynomial:
    """Coefficients low-to-high; the degree bound is ``len(coeffs) - 1``."""

    field: GF2m
    coeffs: tuple[int, ...]

    @property
    def degree_bound(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: int) -> int:
        return self.field.eval_poly(self.coeffs, x)

    def __add__(self, other: "FieldPolynomial") -> "FieldPolynomial":
        if other.field != self.field:
            raise FieldMismatchError("polynomials over different fields")
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return FieldPolynomial(self.field, tuple(x ^ y for x, y in zip(a, b)))


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def eval_poly(p: FieldPolynomial, x: FieldElement) -> FieldElement:
    if x.field != p.field:
        raise FieldMismatchError("point and polynomial belong to different fields")
    return FieldElement(p(x.value), p.field)


def interpolate(points: Iterable[tuple[FieldElement, FieldElement]]) -> FieldPolynomial:
    """Unique polynomial of degree < len(points) through ``points``."""
    pts = list(points)
    if not pts:
        raise ValueError("interpolation needs at least one point")
    f = pts[0][0].field
    for x, y in pts:
        if x.field != f or y.field != f:
            raise FieldMismatchError("points belong to different fields")
    coeffs = f.interpolate([x.value for x, _ in pts], [y.value for _, y in pts])
    return FieldPolynomial(f, tuple(coeffs))


def enumerate_points(field: GF2m, count: int) -> list[FieldElement]:
    return [FieldElement(v, field) for v in field.enumerate_points(count)]


def random_polynomial(
    field: GF2m, rng, degree_bound: int, pinned_high: Sequence[int] | None = None
) -> FieldPolynomial:
    """Random polynomial with the top ``len(pinned_high)`` coefficients fixed.

    Free coefficients are drawn from ``rng.getrandbits`` in ascending order.
    """
    pinned = list(pinned_high or ())
    if len(pinned) > degree_bound + 1:
        raise ValueError("more pinned coefficients than the degree bound allows")
    free = degree_bound + 1 - len(pinned)
    coeffs = [field.random_element(rng) for _ in range(free)] + [field.check(c) for c in pinned]
    return FieldPolynomial(field, tuple(coeffs))
