"""(r, m, k) ramp secret sharing of files over GF(2^L).

A file is zero-padded and cut into ``m - r`` packets. Each packet holds
``slots`` field elements; slot ``s`` of every packet is pinned into the high
coefficients of its own degree-(m-1) polynomial, whose ``r`` low
coefficients are random. Shares are evaluations at public points, one
value per slot.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from . import kernels
from .errors import CapacityError, ConfigurationError, InsufficientSharesError, MixedEpochError
from .field import FieldPolynomial, GF2m

Bits = tuple[int, ...]

COUNTING_CAP_BITS = 24


@dataclass(frozen=True)
class RampParams:
    r: int
    m: int
    k: int
    field: GF2m

    def __post_init__(self):
        if not 1 <= self.r <= self.m <= self.k:
            raise ConfigurationError(f"need 1 <= r <= m <= k, got ({self.r}, {self.m}, {self.k})")
        if self.k > self.field.mask:
            raise CapacityError(
                f"{self.k} shares need {self.k} distinct nonzero points; "
                f"GF(2^{self.field.bits}) has {self.field.mask}"
            )

    @property
    def packets(self) -> int:
        return self.m - self.r


@dataclass(frozen=True)
class FilePacketization:
    bit_length: int
    packets: tuple[tuple[int, ...], ...]
    pad_bits: int

    @property
    def slots(self) -> int:
        return len(self.packets[0])


@dataclass(frozen=True, order=True)
class ShareId:
    file: int
    subset: tuple[int, ...]
    point: int


@dataclass(frozen=True)
class Share:
    id: ShareId
    epoch: int
    value: tuple[int, ...]


def derive_ramp_params(U: int, l: int, field: GF2m) -> RampParams:
    """Scheme instantiation: r = l*C(U-1, l-1), m = k = l*C(U, l)."""
    if not 1 <= l <= U - 1:
        raise ConfigurationError(f"l must lie in [1, U-1] = [1, {U - 1}], got {l}")
    r = l * math.comb(U - 1, l - 1)
    k = l * math.comb(U, l)
    if k > field.mask:
        raise ConfigurationError(
            f"U={U}, l={l} needs {k} evaluation points but GF(2^{field.bits}) has {field.mask}"
        )
    return RampParams(r, k, k, field)


def subsets(U: int, size: int) -> list[tuple[int, ...]]:
    """All size-``size`` subsets of range(U) in lexicographic order."""
    return list(itertools.combinations(range(U), size))


def assign_points(params: RampParams, U: int, l: int) -> dict[tuple[tuple[int, ...], int], int]:
    """Public point for every (subset, index) pair, subsets lexicographic."""
    pairs = [(T, i) for T in subsets(U, l) for i in range(l)]
    if len(pairs) != params.k:
        raise ConfigurationError(f"{len(pairs)} (subset, index) pairs but k={params.k}")
    return dict(zip(pairs, params.field.enumerate_points(params.k)))


# -- packetization -----------------------------------------------------------


def bytes_to_bits(data: bytes) -> Bits:
    return tuple((byte >> (7 - i)) & 1 for byte in data for i in range(8))


def bits_to_bytes(bits: Sequence[int]) -> bytes:
    padded = list(bits) + [0] * (-len(bits) % 8)
    return bytes(
        sum(b << (7 - i) for i, b in enumerate(padded[j : j + 8])) for j in range(0, len(padded), 8)
    )


def _element_from_bits(chunk: Sequence[int]) -> int:
    # first bit of the block is the x^0 coefficient
    return sum(b << i for i, b in enumerate(chunk))


def _bits_from_element(value: int, width: int) -> list[int]:
    return [(value >> i) & 1 for i in range(width)]


def packetize(file_bits: Sequence[int], params: RampParams, slots: int | None = None) -> FilePacketization:
    """Zero-pad and split into ``m - r`` packets of ``slots`` elements each.

    ``slots`` defaults to the smallest count that fits the file.
    """
    B = len(file_bits)
    if B == 0:
        raise ValueError("file must be nonempty")
    L = params.field.bits
    per_round = params.packets * L
    need = -(-B // per_round)
    if slots is None:
        slots = need
    elif slots < need:
        raise CapacityError(f"{B} bits do not fit in {slots} slot(s) of {per_round} bits")
    total = per_round * slots
    bits = list(file_bits) + [0] * (total - B)
    width = slots * L
    packets = tuple(
        tuple(_element_from_bits(bits[j * width + s * L : j * width + (s + 1) * L]) for s in range(slots))
        for j in range(params.packets)
    )
    return FilePacketization(B, packets, total - B)


def depacketize(pack: FilePacketization, field: GF2m) -> Bits:
    bits: list[int] = []
    for packet in pack.packets:
        for element in packet:
            bits.extend(_bits_from_element(element, field.bits))
    return tuple(bits[: pack.bit_length])


# -- encoding / shares -------------------------------------------------------


def encode_file(pack: FilePacketization, params: RampParams, rng) -> list[FieldPolynomial]:
    """One degree-(m-1) polynomial per slot; packet j sits at coefficient r + j."""
    if len(pack.packets) != params.packets:
        raise ConfigurationError("packetization does not match the ramp parameters")
    f = params.field
    polys = []
    for s in range(pack.slots):
        low = [f.random_element(rng) for _ in range(params.r)]
        high = [packet[s] for packet in pack.packets]
        polys.append(FieldPolynomial(f, tuple(low + high)))
    return polys


def make_shares(
    polys: Sequence[FieldPolynomial],
    assignment: Mapping[tuple[tuple[int, ...], int], int],
    epoch: int = 0,
    file_index: int = 0,
) -> list[Share]:
    return [
        Share(ShareId(file_index, T, i), epoch, tuple(p(x) for p in polys))
        for (T, i), x in assignment.items()
    ]


def _single_epoch(shares: Sequence[Share]) -> int:
    epochs = {s.epoch for s in shares}
    if len(epochs) > 1:
        raise MixedEpochError(f"shares span epochs {sorted(epochs)}")
    return epochs.pop()


def interpolate_shares(
    shares: Sequence[Share], assignment: Mapping, params: RampParams
) -> list[list[int]]:
    """Per-slot coefficient lists from exactly ``m`` same-epoch shares."""
    ids = {s.id for s in shares}
    if len(ids) != len(shares):
        raise ValueError("duplicate share ids")
    _single_epoch(shares)
    if len(shares) < params.m:
        raise InsufficientSharesError(f"{len(shares)} shares, need {params.m}")
    use = sorted(shares, key=lambda s: s.id)[: params.m]
    xs = [assignment[(s.id.subset, s.id.point)] for s in use]
    slots = len(use[0].value)
    return [params.field.interpolate(xs, [s.value[slot] for s in use]) for slot in range(slots)]


def reconstruct(
    shares: Sequence[Share], assignment: Mapping, params: RampParams, bit_length: int
) -> Bits:
    """Recover the original ``bit_length``-bit file from >= m same-epoch shares."""
    if len({s.id.file for s in shares}) > 1:
        raise ValueError("shares belong to different files")
    per_slot = interpolate_shares(shares, assignment, params)
    packets = tuple(
        tuple(coeffs[params.r + j] for coeffs in per_slot) for j in range(params.packets)
    )
    total = params.packets * len(per_slot) * params.field.bits
    pack = FilePacketization(bit_length, packets, total - bit_length)
    return depacketize(pack, params.field)


# -- privacy oracle ----------------------------------------------------------


def count_consistent_secrets(
    shares: Iterable[Share], params: RampParams, assignment: Mapping, slot: int = 0
) -> dict[tuple[int, ...], int]:
    """Exhaustive count of degree-(m-1) polynomials matching ``shares``.

    Returns, for every candidate secret (the m - r high coefficients), how
    many polynomials agree with every given share and carry that secret.
    All shares must come from one epoch. Refuses when |F|^m > 2^24.
    """
    shares = list(shares)
    if shares:
        _single_epoch(shares)
    L = params.field.bits
    if L * params.m > COUNTING_CAP_BITS:
        raise CapacityError(
            f"|F|^m = 2^{L * params.m} exceeds the counting cap 2^{COUNTING_CAP_BITS}"
        )
    xs = [assignment[(s.id.subset, s.id.point)] for s in shares]
    ys = [s.value[slot] for s in shares]
    flat = kernels.count_consistent(xs, ys, params.r, params.m, L, params.field.low)
    mask = params.field.mask
    return {
        tuple((idx >> (L * j)) & mask for j in range(params.packets)): c for idx, c in enumerate(flat)
    }
