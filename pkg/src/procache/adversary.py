"""Attacker models and exact privacy verdicts.

Information leakage is measured by exhaustive consistency counting at tiny
field sizes: for each candidate file (the high polynomial coefficients) we
count the polynomials that agree with what the attacker holds. One nonzero
candidate means the file is determined; equal counts everywhere mean the
attacker learned nothing.

Shares captured in different epochs come from polynomials whose low
coefficients were re-randomized independently, so the joint count for a
mixed view is the per-candidate product of the per-epoch counts.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, Mapping, Sequence

from scipy.stats import chisquare

from .netsim import BroadcastMessage, Phase, unpack_elements
from .ramp import RampParams, Share, ShareId, count_consistent_secrets, reconstruct

FULLY_PRIVATE = "fully-private"
PARTIALLY_LEAKED = "partially-leaked"
BROKEN = "broken"


def verdict_from_counts(counts: Mapping) -> str:
    values = list(counts.values())
    nonzero = [c for c in values if c]
    if len(nonzero) == 1:
        return BROKEN
    if nonzero and len(set(values)) == 1:
        return FULLY_PRIVATE
    return PARTIALLY_LEAKED


@dataclass(frozen=True)
class AttackReport:
    mode: str
    verdict: str
    candidates: int | None = None
    nonzero: int | None = None
    max_count: int | None = None
    detail: dict = dc_field(default_factory=dict)

    @classmethod
    def from_counts(cls, mode: str, counts: Mapping, **detail) -> "AttackReport":
        values = list(counts.values())
        return cls(
            mode,
            verdict_from_counts(counts),
            len(values),
            sum(1 for c in values if c),
            max(values) if values else 0,
            detail,
        )

    def record(self, schedule: object = None) -> dict:
        digest = hashlib.sha256(json.dumps(schedule, sort_keys=True, default=str).encode()).hexdigest()[:16]
        return {
            "mode": self.mode,
            "schedule": digest,
            "counts": {"candidates": self.candidates, "nonzero": self.nonzero, "max": self.max_count},
            "verdict": self.verdict,
            "detail": self.detail,
        }


# -- counting across epochs ---------------------------------------------------


def group_by_epoch(shares: Iterable[Share]) -> dict[int, list[Share]]:
    groups: dict[int, dict[ShareId, Share]] = defaultdict(dict)
    for s in shares:
        groups[s.epoch][s.id] = s
    return {e: sorted(g.values(), key=lambda s: s.id) for e, g in sorted(groups.items())}


def mixed_epoch_counts(
    shares: Iterable[Share], params: RampParams, assignment: Mapping, slot: int = 0, cache: dict | None = None
) -> dict[tuple[int, ...], int]:
    """Joint consistent-polynomial count for shares from any mix of epochs."""
    total: dict[tuple[int, ...], int] | None = None
    for group in group_by_epoch(shares).values():
        key = tuple((s.id, s.value[slot]) for s in group)
        if cache is not None and key in cache:
            counts = cache[key]
        else:
            # the epoch tag is irrelevant inside one group
            counts = count_consistent_secrets(group, params, assignment, slot)
            if cache is not None:
                cache[key] = counts
        total = dict(counts) if total is None else {s: total[s] * c for s, c in counts.items()}
    if total is None:
        total = count_consistent_secrets([], params, assignment, slot)
    return total


# -- curious attacker ------------------------------------------------------------


@dataclass
class CuriousView:
    """Verbatim share copies taken from file caches; never key caches."""

    captured: dict[tuple[ShareId, int], Share] = dc_field(default_factory=dict)
    schedule: list[tuple[int, int, str]] = dc_field(default_factory=list)

    def add(self, share: Share) -> None:
        self.captured[(share.id, share.epoch)] = share

    def shares(self, file_index: int | None = None) -> list[Share]:
        return [s for s in self.captured.values() if file_index is None or s.id.file == file_index]


def snapshot(
    view: CuriousView,
    states: Sequence,
    user: int,
    epoch: int,
    share_filter: Callable[[ShareId], bool] | None = None,
    label: str = "",
) -> list[Share]:
    """Copy the matching file-cache shares of ``user`` into ``view``."""
    taken = []
    for sid, share in sorted(states[user].z0.items()):
        if share.epoch > epoch:
            raise ValueError(f"share {sid} is at epoch {share.epoch}, after snapshot epoch {epoch}")
        if share_filter is None or share_filter(sid):
            view.add(share)
            taken.append(share)
    view.schedule.append((user, epoch, label or ("all" if share_filter is None else "filtered")))
    return taken


def attempt_reconstruct(
    view: CuriousView,
    file_index: int,
    params: RampParams,
    assignment: Mapping,
    bit_length: int | None = None,
    cache: dict | None = None,
) -> AttackReport:
    shares = view.shares(file_index)
    groups = group_by_epoch(shares)
    sizes = {e: len(g) for e, g in groups.items()}
    largest = max(groups.values(), key=len) if groups else []
    if len(largest) >= params.m:
        detail = {"epochs": sizes, "reconstructed": True}
        if bit_length is not None:
            bits = reconstruct(largest, assignment, params, bit_length)
            detail["recovered_digest"] = hashlib.sha256(bytes(bits)).hexdigest()[:16]
        return AttackReport("curious", BROKEN, 1, 1, 1, detail)
    largest_counts = count_consistent_secrets(largest, params, assignment)
    union = mixed_epoch_counts(shares, params, assignment, cache=cache)
    return AttackReport.from_counts(
        "curious",
        union,
        epochs=sizes,
        largest_epoch_verdict=verdict_from_counts(largest_counts),
    )


class EpochRecorder:
    """``on_epoch`` callback that snapshots every user's file cache at each epoch."""

    def __init__(self, file_index: int | None = None):
        self.file_index = file_index
        self.views: dict[int, CuriousView] = {}

    def __call__(self, sim, t: int) -> None:
        view = CuriousView()
        keep = None if self.file_index is None else (lambda sid: sid.file == self.file_index)
        for u in range(len(sim.users)):
            snapshot(view, sim.users, u, t, keep)
        self.views[t] = view

    def share(self, epoch: int, sid: ShareId) -> Share:
        for s in self.views[epoch].shares(sid.file):
            if s.id == sid:
                return s
        raise KeyError(f"{sid} not captured at epoch {epoch}")


def one_share_per_index_schedules(assignment: Mapping, epochs: Sequence[int]):
    """Every way to pick one epoch per public point, epochs not all equal."""
    pairs = sorted(assignment)
    for choice in itertools.product(epochs, repeat=len(pairs)):
        if len(set(choice)) > 1:
            yield dict(zip(pairs, choice))


def view_for_schedule(recorder: EpochRecorder, file_index: int, schedule: Mapping) -> CuriousView:
    view = CuriousView()
    for (T, i), epoch in sorted(schedule.items()):
        view.add(recorder.share(epoch, ShareId(file_index, T, i)))
        view.schedule.append((T[0], epoch, f"point {T},{i}"))
    return view


def proactive_sweep(recorder: EpochRecorder, file_index: int, params: RampParams, assignment: Mapping):
    """Attack every one-share-per-point schedule spanning two or more epochs."""
    epochs = sorted(recorder.views)
    cache: dict = {}
    for schedule in one_share_per_index_schedules(assignment, epochs):
        view = view_for_schedule(recorder, file_index, schedule)
        yield schedule, attempt_reconstruct(view, file_index, params, assignment, cache=cache)


# -- user privacy ---------------------------------------------------------------


def user_privacy_audit(sim, user: int, file_index: int) -> AttackReport:
    """What ``user`` can learn about an unrequested file after delivery.

    Starts from the user's cached shares of the file, then walks every
    delivery symbol: symbols for subsets without the user stay masked;
    symbols it can unmask are reduced by every share it caches, and any
    single remaining unknown is a share it learns.
    """
    d = sim.demands
    if d is None:
        raise ValueError("delivery has not run")
    if d[user] == file_index:
        raise ValueError("the audit covers unrequested files only")
    state = sim.users[user]
    L_bits = sim.config.L
    known = {sid: s for sid, s in state.z0.items() if sid.file == file_index}
    masked = unmasked = 0
    entangled = 0
    for msg in sim.delivery_messages:
        L, u = msg.meta.subset, msg.sender
        if u == user:
            continue
        if user not in L:
            masked += 1
            continue
        unmasked += 1
        value = list(unpack_elements(msg.payload, msg.pad_bits, L_bits))
        pad = sim._pad(state.z1[L], sim._delivery_context(L, u), False)
        value = [a ^ b for a, b in zip(value, pad)]
        unknown = []
        for k in L:
            if k == u:
                continue
            T = tuple(v for v in L if v != k)
            sid = ShareId(d[k], T, T.index(u))
            if sid in state.z0:
                value = [a ^ b for a, b in zip(value, state.z0[sid].value)]
            elif sid in known:
                value = [a ^ b for a, b in zip(value, known[sid].value)]
            else:
                unknown.append(sid)
        if len(unknown) == 1 and unknown[0].file == file_index:
            known[unknown[0]] = Share(unknown[0], state.file_epoch[file_index], tuple(value))
        elif len(unknown) > 1 and any(s.file == file_index for s in unknown):
            entangled += 1
    counts = count_consistent_secrets(list(known.values()), sim.params, sim.assignment)
    report = AttackReport.from_counts(
        "user-privacy",
        counts,
        user=user,
        file=file_index,
        shares_visible=len(known),
        masked_symbols=masked,
        unmasked_symbols=unmasked,
        entangled_symbols=entangled,
    )
    if entangled and report.verdict == FULLY_PRIVATE:
        return AttackReport(report.mode, PARTIALLY_LEAKED, report.candidates, report.nonzero, report.max_count, report.detail)
    return report


# -- eavesdropper -----------------------------------------------------------------


@dataclass
class EavesdropperView:
    """Read-only record of broadcasts; attach ``observe`` as a network tap."""

    messages: list[BroadcastMessage] = dc_field(default_factory=list)

    def observe(self, msg: BroadcastMessage) -> None:
        self.messages.append(msg)

    def delivery(self) -> list[BroadcastMessage]:
        return [m for m in self.messages if m.phase == Phase.DELIVERY]


def eavesdropper_audit(view: EavesdropperView, ledger, secret_payloads: Iterable[bytes] = ()) -> AttackReport:
    """Structural one-time-pad discipline over the observed delivery symbols.

    Broken if any context masks two symbols, a context was never recorded in
    the ledger, or a secret key value appears verbatim as a payload.
    """
    contexts = Counter(m.meta.context for m in view.delivery())
    reused = sum(1 for c in contexts.values() if c > 1)
    unrecorded = sum(1 for c in contexts if c not in ledger)
    secrets_ = set(secret_payloads)
    exposed = sum(1 for m in view.messages if m.payload in secrets_)
    broken = bool(reused or unrecorded or exposed)
    return AttackReport(
        "eavesdropper",
        BROKEN if broken else FULLY_PRIVATE,
        detail={
            "symbols": sum(contexts.values()),
            "reused_contexts": reused,
            "unrecorded_contexts": unrecorded,
            "exposed_keys": exposed,
        },
    )


def pad_uniformity(samples: Iterable[int], bits: int) -> tuple[float, float]:
    """Chi-square goodness of fit of symbol values to uniform on 2^bits."""
    hist = Counter(samples)
    observed = [hist.get(v, 0) for v in range(1 << bits)]
    result = chisquare(observed)
    return float(result.statistic), float(result.pvalue)
