"""Group key establishment over a broadcast channel, plus one-time key derivation.

Every user holds a private exponent. Subset keys ``g^(prod x_u)`` are built
up one member at a time: for each subset of size s the designated member
raises the already-public value of the subset minus itself to its own
exponent and broadcasts the result. The last size is never broadcast; every
member computes it locally, so only members know it.

Two independent chains run this way: the main chain yields the size-(l+1)
master secret keys, and a second chain with fresh exponents yields the
size-l renewal keys (only needed when l >= 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from sympy import isprime

from .errors import ConfigurationError, LedgerViolation, ProtocolError
from .field import GF2m
from .netsim import BroadcastMessage, MessageMeta, Phase
from .ramp import subsets


@dataclass(frozen=True)
class GroupParams:
    """Order-p subgroup of Z_q^* for a safe prime q = 2p + 1."""

    q: int
    p: int
    g: int

    def __post_init__(self):
        if self.q != 2 * self.p + 1:
            raise ConfigurationError("q must equal 2p + 1")
        if not (isprime(self.q) and isprime(self.p)):
            raise ConfigurationError("q and p must both be prime")
        if self.g % self.q in (0, 1) or pow(self.g, self.p, self.q) != 1:
            raise ConfigurationError("g does not generate the order-p subgroup")

    @property
    def width(self) -> int:
        """Bytes in the fixed-width encoding of a group element."""
        return (self.q.bit_length() + 7) // 8

    def encode(self, element: int) -> bytes:
        return element.to_bytes(self.width, "big")

    def random_exponent(self, rng) -> int:
        return rng.randint(1, self.p - 1)


TOY_GROUP = GroupParams(q=23, p=11, g=2)
DEFAULT_GROUP = GroupParams(q=2305843009213691579, p=1152921504606845789, g=4)


@dataclass(frozen=True)
class MasterSecretKey:
    subset: tuple[int, ...]
    element: int
    epoch_established: int = 0
    salt: bytes = b""


class Purpose:
    RENEWAL_X = "renewal-X"
    RENEWAL_Y = "renewal-Y"
    DELIVERY = "delivery"


@dataclass(frozen=True, order=True)
class KeyContext:
    """Everything a one-time pad is bound to."""

    purpose: str
    subset: tuple[int, ...]
    file: int | None
    epoch: int
    sender: int
    index: tuple[int, ...]

    def encode(self) -> bytes:
        file = "-" if self.file is None else str(self.file)
        return (
            f"{self.purpose};subset={','.join(map(str, self.subset))};file={file};"
            f"epoch={self.epoch};sender={self.sender};index={','.join(map(str, self.index))}"
        ).encode()


@dataclass(frozen=True)
class DerivedKey:
    context: KeyContext
    value: tuple[int, ...]


class KeyLedger:
    """Set of contexts already used to encrypt; a repeat is a hard failure.

    Single writer: only the encrypting side records. Receivers re-derive the
    same pad without touching the ledger.
    """

    def __init__(self):
        self._seen: set[KeyContext] = set()
        self._order: list[KeyContext] = []

    def record(self, context: KeyContext) -> None:
        if context in self._seen:
            raise LedgerViolation(f"one-time key context reused: {context.encode().decode()}")
        self._seen.add(context)
        self._order.append(context)

    def __contains__(self, context) -> bool:
        return context in self._seen

    def __len__(self) -> int:
        return len(self._order)

    def __iter__(self):
        return iter(self._order)

    def count(self, purpose: str) -> int:
        return sum(1 for c in self._order if c.purpose == purpose)


def designated_user(T: Sequence[int]) -> int:
    """Member of ``T`` at index (sum of members) mod |T|."""
    T = tuple(sorted(T))
    if not T:
        raise ValueError("empty subset")
    return T[sum(T) % len(T)]


def estimate_per_user_computations(U: int, size: int) -> int:
    return math.ceil(math.comb(U, size) / U)


def msk_to_seed(msk: MasterSecretKey, group: GroupParams) -> bytes:
    return group.encode(msk.element)


def hkdf_sha256(ikm: bytes, salt: bytes, info: bytes, length: int) -> bytes:
    return HKDF(algorithm=hashes.SHA256(), length=length, salt=salt or None, info=info).derive(ikm)


def derive_key(
    msk: MasterSecretKey,
    context: KeyContext,
    length_bits: int,
    field: GF2m,
    group: GroupParams,
    ledger: KeyLedger | None = None,
) -> DerivedKey:
    """HKDF-SHA256 pad of ``length_bits`` bits split into field elements.

    Salt is the public agreement values of the subset, info the serialized
    context. Passing ``ledger`` marks this derivation as the encrypting use.
    """
    if length_bits % field.bits:
        raise ValueError(f"length {length_bits} is not a multiple of L={field.bits}")
    if ledger is not None:
        ledger.record(context)
    nbytes = (length_bits + 7) // 8
    raw = hkdf_sha256(msk_to_seed(msk, group), msk.salt, context.encode(), nbytes)
    v = int.from_bytes(raw, "big") >> (8 * nbytes - length_bits)
    n = length_bits // field.bits
    L = field.bits
    return DerivedKey(context, tuple((v >> (L * (n - 1 - e))) & field.mask for e in range(n)))


class KeySchedule:
    """Pad source used by the protocol.

    In ``ideal`` mode HKDF is replaced by fresh uniform values per context
    (drawn once and shared by sender and receivers); test hook only.
    """

    def __init__(self, field: GF2m, group: GroupParams, ledger: KeyLedger, ideal_rng=None):
        self.field = field
        self.group = group
        self.ledger = ledger
        self._ideal_rng = ideal_rng
        self._ideal: dict[KeyContext, tuple[int, ...]] = {}

    @property
    def ideal(self) -> bool:
        return self._ideal_rng is not None

    def pad(self, msk: MasterSecretKey, context: KeyContext, n_elements: int, encrypting: bool) -> tuple[int, ...]:
        if self._ideal_rng is None:
            ledger = self.ledger if encrypting else None
            return derive_key(msk, context, n_elements * self.field.bits, self.field, self.group, ledger).value
        if encrypting:
            self.ledger.record(context)
        if context not in self._ideal:
            self._ideal[context] = tuple(self.field.random_element(self._ideal_rng) for _ in range(n_elements))
        return self._ideal[context]


# -- key agreement ------------------------------------------------------------


@dataclass
class AgreementResult:
    keys: dict[int, dict[tuple[int, ...], MasterSecretKey]]
    public: dict[tuple[int, ...], int]
    computations: dict[int, int] = dc_field(default_factory=dict)


def run_key_agreement(
    exponents: Mapping[int, int],
    group: GroupParams,
    size: int,
    net,
    chain: str = "msk",
) -> AgreementResult:
    """Establish a shared key for every subset of ``size`` users.

    Public values for subsets of size 1..size-1 are broadcast over ``net``;
    the final size is computed by each member and never leaves it.
    """
    users = sorted(exponents)
    if size < 2 or size > len(users):
        raise ConfigurationError(f"subset size must be in [2, {len(users)}], got {size}")
    q = group.q
    public: dict[tuple[int, ...], int] = {}
    computations = {u: 0 for u in users}

    def collect(delivered):
        for msg in delivered:
            if msg.meta is None or msg.meta.chain != chain:
                continue
            public[msg.meta.subset] = int.from_bytes(msg.payload, "big")

    net.open(Phase.KEY_AGREEMENT)
    for u in users:
        value = pow(group.g, exponents[u], q)
        computations[u] += 1
        net.broadcast(
            BroadcastMessage(u, Phase.KEY_AGREEMENT, 0, group.encode(value), meta=MessageMeta(subset=(u,), chain=chain))
        )
    collect(net.barrier())

    for s in range(2, size):
        net.open(Phase.KEY_AGREEMENT)
        for S in subsets(len(users), s):
            S = tuple(users[i] for i in S)
            d = designated_user(S)
            rest = tuple(v for v in S if v != d)
            if rest not in public:
                raise ProtocolError(f"missing public value for {rest}")
            value = pow(public[rest], exponents[d], q)
            computations[d] += 1
            net.broadcast(
                BroadcastMessage(d, Phase.KEY_AGREEMENT, s - 1, group.encode(value), meta=MessageMeta(subset=S, chain=chain))
            )
        collect(net.barrier())

    keys: dict[int, dict[tuple[int, ...], MasterSecretKey]] = {u: {} for u in users}
    for S in subsets(len(users), size):
        S = tuple(users[i] for i in S)
        salt = b"".join(group.encode(public.get(tuple(v for v in S if v != w), 0)) for w in S)
        for u in S:
            rest = tuple(v for v in S if v != u)
            if rest not in public:
                raise ProtocolError(f"user {u} is missing the public value for {rest}")
            keys[u][S] = MasterSecretKey(S, pow(public[rest], exponents[u], q), 0, salt)
            computations[u] += 1
    return AgreementResult(keys, public, computations)
