"""Closed-form memory/load trade-off of the scheme and the comparison bound."""

from __future__ import annotations

import math
from fractions import Fraction

from .errors import ConfigurationError


class OutOfRange(ConfigurationError):
    """Memory value outside the range the inverse formula covers."""


def _check(U: int, N: int, l: int) -> None:
    if not 1 <= l <= U - 1:
        raise ConfigurationError(f"l must lie in [1, {U - 1}], got {l}")
    if N < 1:
        raise ConfigurationError("N must be positive")


def file_cache_memory(U: int, N: int, l: int) -> Fraction:
    """Share cache size in files: N*l/(U-l)."""
    _check(U, N, l)
    return Fraction(N * l, U - l)


def key_cache_memory(l: int) -> Fraction:
    return Fraction(1, l)


def memory(U: int, N: int, l: int) -> Fraction:
    """M(l) = N*l/(U-l) + 1/l."""
    return file_cache_memory(U, N, l) + key_cache_memory(l)


def load(U: int, l: int) -> Fraction:
    """Delivery load U/l in files."""
    if not 1 <= l <= U - 1:
        raise ConfigurationError(f"l must lie in [1, {U - 1}], got {l}")
    return Fraction(U, l)


def _disc(U: int, N: int, M: float) -> float:
    d = (M * U - 1) ** 2 - 4 * N * U
    if d < 0:
        raise OutOfRange(f"M={M} gives a negative discriminant")
    return d


def theorem_load(U: int, N: int, M: float) -> float:
    """2U(N+M) / (MU + 1 + sqrt((MU-1)^2 - 4NU))."""
    M = float(M)
    return 2 * U * (N + M) / (M * U + 1 + math.sqrt(_disc(U, N, M)))


def l_of_memory(U: int, N: int, M: float) -> float:
    """Inverse of M(l): larger root of (N+M) l^2 - (MU+1) l + U = 0.

    Returns the root that the forward map M(l) produces when
    N*U*l/(U-l) + 1 > U/l, which holds for every l whenever N >= U.
    """
    M = float(M)
    return (M * U + 1 + math.sqrt(_disc(U, N, M))) / (2 * (N + M))


def comparison_load(U: int, N: int, M_prime: float) -> float:
    """Upper bound of the centralized secure scheme at memory M'.

    2U(N+M'-1) / (1 + (M'-1)U + sqrt((1-(M'-1)U)^2 - 4UN)).
    """
    Mp = float(M_prime) - 1
    d = (1 - Mp * U) ** 2 - 4 * U * N
    if d < 0:
        raise OutOfRange(f"M'={M_prime} gives a negative discriminant")
    return 2 * U * (N + Mp) / (1 + Mp * U + math.sqrt(d))
