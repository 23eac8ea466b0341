"""Deterministic synchronous broadcast network.

Messages broadcast while a phase is open are held until :meth:`barrier`,
then appended to the transcript in (round, sender) order and handed to
every user and every attached tap. There is no loss or latency.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass
from typing import Callable, Iterable, TextIO

from .errors import ProtocolError


class Phase(str, enum.Enum):
    KEY_AGREEMENT = "key-agreement"
    RENEWAL_X = "renewal-X"
    RENEWAL_Y = "renewal-Y"
    DELIVERY = "delivery"


@dataclass(frozen=True)
class MessageMeta:
    file: int | None = None
    subset: tuple[int, ...] | None = None
    point: int | None = None
    epoch: int | None = None
    chain: str | None = None
    context: object | None = None

    def as_record(self) -> dict:
        out = {}
        for key in ("file", "subset", "point", "epoch", "chain"):
            value = getattr(self, key)
            if value is not None:
                out[key] = list(value) if isinstance(value, tuple) else value
        if self.context is not None:
            out["context"] = self.context.encode().decode()
        return out


@dataclass(frozen=True)
class BroadcastMessage:
    sender: int
    phase: Phase
    round: int
    payload: bytes
    pad_bits: int = 0
    meta: MessageMeta | None = None

    def __post_init__(self):
        if not 0 <= self.pad_bits < 8 * max(len(self.payload), 1):
            raise ValueError("declared padding exceeds the payload")

    @property
    def payload_bits(self) -> int:
        return 8 * len(self.payload) - self.pad_bits

    def record(self) -> dict:
        """Export record; field order is part of the file format."""
        return {
            "phase": self.phase.value,
            "round": self.round,
            "sender": self.sender,
            "meta": self.meta.as_record() if self.meta else {},
            "payloadBits": self.payload_bits,
            "payloadHash": hashlib.sha256(self.payload).hexdigest(),
        }


def pack_elements(values: Iterable[int], bits: int) -> tuple[bytes, int]:
    """Big-endian bit packing of L-bit elements; returns (payload, pad_bits)."""
    values = list(values)
    total = bits * len(values)
    acc = 0
    for v in values:
        acc = (acc << bits) | v
    nbytes = (total + 7) // 8
    pad = 8 * nbytes - total
    return (acc << pad).to_bytes(nbytes, "big"), pad


def unpack_elements(payload: bytes, pad_bits: int, bits: int) -> tuple[int, ...]:
    acc = int.from_bytes(payload, "big") >> pad_bits
    n = (8 * len(payload) - pad_bits) // bits
    mask = (1 << bits) - 1
    return tuple((acc >> (bits * (n - 1 - i))) & mask for i in range(n))


class Transcript:
    def __init__(self):
        self.messages: list[BroadcastMessage] = []
        self.totals: dict[Phase, int] = {p: 0 for p in Phase}

    def append(self, msg: BroadcastMessage) -> None:
        self.messages.append(msg)
        self.totals[msg.phase] += msg.payload_bits

    def __len__(self) -> int:
        return len(self.messages)

    def __iter__(self):
        return iter(self.messages)

    def phase_bits(self, phase: Phase) -> int:
        return sum(m.payload_bits for m in self.messages if m.phase == phase)

    @property
    def total_bits(self) -> int:
        return sum(m.payload_bits for m in self.messages)

    def of_phase(self, *phases: Phase) -> list[BroadcastMessage]:
        return [m for m in self.messages if m.phase in phases]

    def write_jsonl(self, fh: TextIO) -> None:
        for m in self.messages:
            fh.write(json.dumps(m.record(), separators=(",", ":")) + "\n")

    def digest(self) -> str:
        h = hashlib.sha256()
        for m in self.messages:
            h.update(json.dumps(m.record(), separators=(",", ":")).encode())
            h.update(m.payload)
        return h.hexdigest()


def phase_bits(transcript: Transcript, phase: Phase) -> int:
    return transcript.phase_bits(phase)


class BroadcastNetwork:
    """Synchronous broadcast among ``n_users`` users with transcript capture."""

    def __init__(self, n_users: int):
        self.n_users = n_users
        self.transcript = Transcript()
        self.delivered = [0] * n_users
        self._open: frozenset[Phase] = frozenset()
        self._pending: list[tuple[int, BroadcastMessage]] = []
        self._seq = 0
        self._taps: list[tuple[Callable[[BroadcastMessage], None], frozenset[Phase]]] = []
        self._started = False

    def attach_tap(self, observer: Callable[[BroadcastMessage], None], phases: Iterable[Phase] | None = None) -> None:
        if self._started:
            raise ProtocolError("taps must be attached before the simulation starts")
        self._taps.append((observer, frozenset(phases) if phases is not None else frozenset(Phase)))

    def open(self, *phases: Phase) -> None:
        if self._pending:
            raise ProtocolError("cannot open a phase with undelivered messages")
        self._started = True
        self._open = frozenset(phases)

    def broadcast(self, msg: BroadcastMessage) -> None:
        if msg.phase not in self._open:
            raise ProtocolError(f"{msg.phase.value} message sent while {sorted(p.value for p in self._open)} open")
        if not 0 <= msg.sender < self.n_users:
            raise ProtocolError(f"unknown sender {msg.sender}")
        self._pending.append((self._seq, msg))
        self._seq += 1

    def barrier(self) -> list[BroadcastMessage]:
        """Deliver pending messages in (round, sender) order and close the phase."""
        batch = [m for _, m in sorted(self._pending, key=lambda t: (t[1].round, t[1].sender, t[0]))]
        self._pending.clear()
        self._open = frozenset()
        for msg in batch:
            self.transcript.append(msg)
            for u in range(self.n_users):
                self.delivered[u] += 1
            for observer, phases in self._taps:
                if msg.phase in phases:
                    observer(msg)
        return batch
