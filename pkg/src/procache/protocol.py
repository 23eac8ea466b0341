"""End-to-end scheme: prefetching, key establishment, renewal epochs, delivery.

One :class:`Simulation` is one deterministic, single-threaded run. All
randomness flows from ``SystemConfig.seed`` through labelled sub-generators,
so two runs with the same config produce identical transcripts and reports.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import tradeoff
from .errors import ConfigurationError, ProtocolError
from .field import FieldPolynomial, GF2m, field_for
from .groupkey import (
    DEFAULT_GROUP,
    GroupParams,
    KeyContext,
    KeyLedger,
    KeySchedule,
    MasterSecretKey,
    Purpose,
    run_key_agreement,
)
from .netsim import BroadcastMessage, BroadcastNetwork, MessageMeta, Phase, pack_elements, unpack_elements
from .ramp import (
    Bits,
    RampParams,
    Share,
    ShareId,
    assign_points,
    derive_ramp_params,
    encode_file,
    make_shares,
    packetize,
    reconstruct,
    subsets,
)

WORST_CASE = "worst-case"


@dataclass(frozen=True)
class SystemConfig:
    U: int
    N: int
    l: int
    L: int
    T: int = 0
    schedule: tuple[frozenset[int], ...] = ()
    demands: tuple[int, ...] | str = WORST_CASE
    seed: int = 0
    slots: int = 1
    group: GroupParams = DEFAULT_GROUP

    def __post_init__(self):
        if self.U < 2:
            raise ConfigurationError("need at least two users")
        if self.N < 1:
            raise ConfigurationError("need at least one file")
        if not 1 <= self.l <= self.U - 1:
            raise ConfigurationError(f"l must lie in [1, {self.U - 1}], got {self.l}")
        if not 1 <= self.L <= 64:
            raise ConfigurationError(f"L must lie in [1, 64], got {self.L}")
        if self.slots < 1:
            raise ConfigurationError("slots must be positive")
        if self.T < 0:
            raise ConfigurationError("T must be non-negative")
        k = self.l * math.comb(self.U, self.l)
        if k > (1 << self.L) - 1:
            raise ConfigurationError(f"l*C(U,l) = {k} evaluation points exceed 2^L - 1 = {(1 << self.L) - 1}")
        if self.schedule and len(self.schedule) != self.T:
            raise ConfigurationError(f"schedule lists {len(self.schedule)} update sets for T={self.T}")
        for A in self.schedule:
            if any(not 0 <= n < self.N for n in A):
                raise ConfigurationError(f"update set {sorted(A)} names a file outside [0, {self.N})")
        if self.demands == WORST_CASE:
            if self.N < self.U:
                raise ConfigurationError("worst-case (distinct) demands need N >= U")
        else:
            if len(self.demands) != self.U or any(not 0 <= d < self.N for d in self.demands):
                raise ConfigurationError(f"demand vector {self.demands} invalid for U={self.U}, N={self.N}")

    @property
    def field(self) -> GF2m:
        return field_for(self.L)

    @property
    def ramp(self) -> RampParams:
        return derive_ramp_params(self.U, self.l, self.field)

    @property
    def share_bits(self) -> int:
        """F_s: bits per share (all slots)."""
        return self.L * self.slots

    @property
    def file_bits(self) -> int:
        """B = F_s * l * C(U-1, l)."""
        return self.share_bits * self.l * math.comb(self.U - 1, self.l)

    def update_sets(self) -> tuple[frozenset[int], ...]:
        if self.schedule:
            return self.schedule
        return tuple(frozenset(range(self.N)) for _ in range(self.T))

    def demand_vector(self) -> tuple[int, ...]:
        if self.demands == WORST_CASE:
            return tuple(range(self.U))
        return tuple(self.demands)


_CONFIG_KEYS = {"U", "N", "l", "L", "T", "schedule", "demands", "seed", "slots"}


def _ints(text: str) -> list[int]:
    text = text.strip()
    return [int(x) for x in text.split(",")] if text else []


def parse_config(text: str) -> SystemConfig:
    """Parse the flat ``key = value`` scenario format.

    ``schedule`` is a comma-separated list of braced sets, e.g.
    ``{0},{0,2}``; ``demands`` is ``worst-case`` or comma-separated ints.
    """
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    missing = {"U", "N", "l", "L"} - values.keys()
    if missing:
        raise ConfigurationError(f"missing required keys: {', '.join(sorted(missing))}")
    try:
        kwargs: dict = {k: int(values[k]) for k in ("U", "N", "l", "L", "T", "seed", "slots") if k in values}
        if "schedule" in values:
            sched = values["schedule"].strip()
            sets = re.findall(r"\{([^}]*)\}", sched)
            if re.sub(r"\{[^}]*\}|[,\s]", "", sched):
                raise ConfigurationError(f"malformed schedule {sched!r}")
            kwargs["schedule"] = tuple(frozenset(_ints(s)) for s in sets)
        if "demands" in values and values["demands"] != WORST_CASE:
            kwargs["demands"] = tuple(_ints(values["demands"]))
    except ValueError as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"malformed value: {exc}") from None
    return SystemConfig(**kwargs)


@dataclass
class UserState:
    id: int
    exponent: int
    renewal_exponent: int
    z0: dict[ShareId, Share] = dc_field(default_factory=dict)
    z1: dict[tuple[int, ...], MasterSecretKey] = dc_field(default_factory=dict)
    renewal_keys: dict[tuple[int, ...], MasterSecretKey] = dc_field(default_factory=dict)
    file_epoch: dict[int, int] = dc_field(default_factory=dict)

    def shares_of(self, file_index: int) -> list[Share]:
        return [s for sid, s in self.z0.items() if sid.file == file_index]


@dataclass(frozen=True)
class FaultHooks:
    """Test hooks; all off in an honest run."""

    zero_renewal: bool = False
    ideal_pads: bool = False
    reuse_delivery_context: bool = False
    wrong_point_index: bool = False


@dataclass(frozen=True)
class DeliverySymbol:
    sender: int
    subset: tuple[int, ...]
    value: tuple[int, ...]
    context: KeyContext


class Simulation:
    def __init__(self, config: SystemConfig, hooks: FaultHooks | None = None, taps: Iterable = ()):
        self.config = config
        self.hooks = hooks or FaultHooks()
        self.field = config.field
        self.params = config.ramp
        self.assignment = assign_points(self.params, config.U, config.l)
        self.net = BroadcastNetwork(config.U)
        for observer, phases in taps:
            self.net.attach_tap(observer, phases)
        self.ledger = KeyLedger()
        ideal_rng = self._rng("ideal-pads") if self.hooks.ideal_pads else None
        self.keys = KeySchedule(self.field, config.group, self.ledger, ideal_rng)
        self.B = config.file_bits
        lib_rng = self._rng("library")
        self.library: list[Bits] = [
            tuple(lib_rng.getrandbits(1) for _ in range(self.B)) for _ in range(config.N)
        ]
        self.users: list[UserState] = []
        for u in range(config.U):
            rng = self._rng(f"user-{u}-exponents")
            self.users.append(
                UserState(u, config.group.random_exponent(rng), config.group.random_exponent(rng))
            )
        self._user_rngs = [self._rng(f"user-{u}-renewal") for u in range(config.U)]
        self.server_polynomials: dict[int, list[FieldPolynomial]] = {}
        self.epoch = 0
        self.computations: dict[str, dict[int, int]] = {}
        self.demands: tuple[int, ...] | None = None
        self.delivery_messages: list[BroadcastMessage] = []
        self.decoded: dict[int, Bits | None] = {}
        self._stage = "fresh"

    def _rng(self, label: str) -> random.Random:
        return random.Random(f"{self.config.seed}:{label}")

    @property
    def transcript(self):
        return self.net.transcript

    # -- placement -----------------------------------------------------------

    def prefetch(self) -> None:
        if self._stage != "fresh":
            raise ProtocolError("prefetch runs once, on a fresh system")
        rng = self._rng("server")
        for n, bits in enumerate(self.library):
            pack = packetize(bits, self.params, self.config.slots)
            polys = encode_file(pack, self.params, rng)
            self.server_polynomials[n] = polys
            for share in make_shares(polys, self.assignment, 0, n):
                for u in share.id.subset:
                    self.users[u].z0[share.id] = share
        for user in self.users:
            user.file_epoch = {n: 0 for n in range(self.config.N)}
        self._stage = "prefetched"

    def establish_keys(self) -> None:
        if self._stage not in ("fresh", "prefetched"):
            raise ProtocolError("keys are established once, before renewal")
        cfg = self.config
        main = run_key_agreement({u.id: u.exponent for u in self.users}, cfg.group, cfg.l + 1, self.net, "msk")
        self.computations["msk"] = main.computations
        self.public_values = main.public
        for u in self.users:
            u.z1 = main.keys[u.id]
        if cfg.l >= 2:
            ren = run_key_agreement(
                {u.id: u.renewal_exponent for u in self.users}, cfg.group, cfg.l, self.net, "renewal"
            )
            self.computations["renewal"] = ren.computations
            for u in self.users:
                u.renewal_keys = ren.keys[u.id]
        self._stage = "keyed" if self._stage == "prefetched" else "keyed-only"

    def _require_ready(self) -> None:
        if self._stage != "keyed":
            raise ProtocolError("prefetch and key establishment must both complete first")

    def renewal_epoch(self, t: int, files: Iterable[int]) -> None:
        """Refresh every share of each file in ``files`` to epoch ``t``."""
        self._require_ready()
        if t <= self.epoch:
            raise ProtocolError(f"epoch {t} does not follow epoch {self.epoch}")
        files = sorted(set(files))
        for n in files:
            for user in self.users:
                if user.file_epoch[n] >= t:
                    raise ProtocolError(f"file {n} already at epoch {user.file_epoch[n]}")
            self._renew_file(t, n)
        self.epoch = t

    def _pad(self, key: MasterSecretKey, ctx: KeyContext, encrypting: bool) -> tuple[int, ...]:
        return self.keys.pad(key, ctx, self.config.slots, encrypting)

    def _renew_file(self, t: int, n: int) -> None:
        cfg, f = self.config, self.field
        r, slots = self.params.r, cfg.slots
        contrib: dict[int, list[list[int]]] = {}
        for u in range(cfg.U):
            rng = self._user_rngs[u]
            if self.hooks.zero_renewal:
                contrib[u] = [[0] * r for _ in range(slots)]
            else:
                contrib[u] = [[f.random_element(rng) for _ in range(r)] for _ in range(slots)]

        def h_at(u: int, x: int) -> tuple[int, ...]:
            return tuple(f.eval_poly(c, x) for c in contrib[u])

        self.net.open(Phase.RENEWAL_X, Phase.RENEWAL_Y)
        for u in range(cfg.U):
            user = self.users[u]
            for (T, i), x in self.assignment.items():
                if u in T:
                    if cfg.l < 2:
                        continue
                    ctx = KeyContext(Purpose.RENEWAL_X, T, n, t, u, (i,))
                    key, phase = user.renewal_keys[T], Phase.RENEWAL_X
                else:
                    L = tuple(sorted(T + (u,)))
                    ctx = KeyContext(Purpose.RENEWAL_Y, L, n, t, u, (i,))
                    key, phase = user.z1[L], Phase.RENEWAL_Y
                pad = self._pad(key, ctx, True)
                masked = [a ^ b for a, b in zip(h_at(u, x), pad)]
                payload, pad_bits = pack_elements(masked, cfg.L)
                meta = MessageMeta(file=n, subset=T, point=i, epoch=t, context=ctx)
                self.net.broadcast(BroadcastMessage(u, phase, t, payload, pad_bits, meta))
        inbox = {(m.meta.subset, m.meta.point, m.sender): m for m in self.net.barrier()}

        for k in range(cfg.U):
            user = self.users[k]
            for (T, i), x in self.assignment.items():
                if k not in T:
                    continue
                agg = list(h_at(k, x))
                for u in range(cfg.U):
                    if u == k:
                        continue
                    msg = inbox.get((T, i, u))
                    if msg is None:
                        raise ProtocolError(f"user {k} missing renewal contribution of user {u} for {T},{i}")
                    if u in T:
                        ctx = KeyContext(Purpose.RENEWAL_X, T, n, t, u, (i,))
                        key = user.renewal_keys[T]
                    else:
                        L = tuple(sorted(T + (u,)))
                        ctx = KeyContext(Purpose.RENEWAL_Y, L, n, t, u, (i,))
                        key = user.z1[L]
                    pad = self._pad(key, ctx, False)
                    got = unpack_elements(msg.payload, msg.pad_bits, cfg.L)
                    agg = [a ^ g ^ p for a, g, p in zip(agg, got, pad)]
                sid = ShareId(n, T, i)
                old = user.z0[sid]
                user.z0[sid] = Share(sid, t, tuple(a ^ b for a, b in zip(old.value, agg)))
            user.file_epoch[n] = t

    # -- delivery --------------------------------------------------------------

    def _delivery_context(self, L: tuple[int, ...], u: int) -> KeyContext:
        return KeyContext(Purpose.DELIVERY, L, None, self.epoch, u, (self.config.l + 1 + L.index(u),))

    def delivery(self, demands: Sequence[int] | None = None) -> list[DeliverySymbol]:
        """Every user sends one masked symbol per (l+1)-subset containing it."""
        self._require_ready()
        if self.demands is not None:
            raise ProtocolError("delivery already ran")
        cfg = self.config
        d = tuple(demands) if demands is not None else cfg.demand_vector()
        if len(d) != cfg.U or any(not 0 <= x < cfg.N for x in d):
            raise ConfigurationError(f"invalid demand vector {d}")
        self.demands = d
        symbols = []
        self.net.open(Phase.DELIVERY)
        for u in range(cfg.U):
            user = self.users[u]
            first_ctx = None
            for L in subsets(cfg.U, cfg.l + 1):
                if u not in L:
                    continue
                ctx = self._delivery_context(L, u)
                if self.hooks.reuse_delivery_context and u == 0:
                    first_ctx = first_ctx or ctx
                    ctx = first_ctx
                acc = list(self._pad(user.z1[L], ctx, True))
                for k in L:
                    if k == u:
                        continue
                    Tk = tuple(v for v in L if v != k)
                    i = Tk.index(u)
                    if self.hooks.wrong_point_index:
                        i = (i + 1) % cfg.l
                    share = user.z0[ShareId(d[k], Tk, i)]
                    acc = [a ^ b for a, b in zip(acc, share.value)]
                payload, pad_bits = pack_elements(acc, cfg.L)
                self.net.broadcast(
                    BroadcastMessage(u, Phase.DELIVERY, 0, payload, pad_bits, MessageMeta(subset=L, context=ctx))
                )
                symbols.append(DeliverySymbol(u, L, tuple(acc), ctx))
        self.delivery_messages = self.net.barrier()
        self._stage = "delivered"
        return symbols

    def received_shares(self, k: int) -> list[Share]:
        """Shares of its demand that user ``k`` strips out of the delivery."""
        cfg = self.config
        user = self.users[k]
        d = self.demands
        epoch = user.file_epoch[d[k]]
        out = []
        for msg in self.delivery_messages:
            L, u = msg.meta.subset, msg.sender
            if k not in L or u == k:
                continue
            value = unpack_elements(msg.payload, msg.pad_bits, cfg.L)
            pad = self._pad(user.z1[L], self._delivery_context(L, u), False)
            value = [a ^ b for a, b in zip(value, pad)]
            for k2 in L:
                if k2 in (u, k):
                    continue
                T2 = tuple(v for v in L if v != k2)
                cached = user.z0[ShareId(d[k2], T2, T2.index(u))]
                value = [a ^ b for a, b in zip(value, cached.value)]
            Tk = tuple(v for v in L if v != k)
            out.append(Share(ShareId(d[k], Tk, Tk.index(u)), epoch, tuple(value)))
        return out

    def decode_all(self) -> dict[int, Bits | None]:
        if self.demands is None:
            raise ProtocolError("delivery has not run")
        for k in range(self.config.U):
            shares = self.users[k].shares_of(self.demands[k]) + self.received_shares(k)
            try:
                self.decoded[k] = reconstruct(shares, self.assignment, self.params, self.B)
            except Exception:  # noqa: BLE001 - any failure is a decode failure
                self.decoded[k] = None
        return self.decoded

    # -- reporting -------------------------------------------------------------

    def run(self, demands: Sequence[int] | None = None, on_epoch: Callable | None = None) -> dict:
        """Full pipeline; ``on_epoch(sim, t)`` fires after placement and after each renewal."""
        self.prefetch()
        self.establish_keys()
        if on_epoch is not None:
            on_epoch(self, 0)
        for t, A in enumerate(self.config.update_sets(), 1):
            self.renewal_epoch(t, A)
            if on_epoch is not None:
                on_epoch(self, t)
        self.delivery(demands)
        self.decode_all()
        return self.report()

    def memory_bits(self, user: UserState) -> dict[str, int]:
        Fs = self.config.share_bits
        return {
            "file_cache": len(user.z0) * Fs,
            "key_cache": len(user.z1) * Fs,
            "renewal_keys": len(user.renewal_keys) * Fs,
            "key_storage": (len(user.z1) + len(user.renewal_keys)) * 8 * self.config.group.width,
        }

    def secret_key_payloads(self) -> set[bytes]:
        enc = self.config.group.encode
        out = set()
        for user in self.users:
            out.update(enc(k.element) for k in user.z1.values())
            out.update(enc(k.element) for k in user.renewal_keys.values())
        return out

    def keys_agree(self) -> bool:
        for attr in ("z1", "renewal_keys"):
            seen: dict[tuple[int, ...], int] = {}
            for user in self.users:
                for S, key in getattr(user, attr).items():
                    if seen.setdefault(S, key.element) != key.element:
                        return False
        return True

    def report(self) -> dict:
        cfg = self.config
        mem = [self.memory_bits(u) for u in self.users]
        per_user_M = {Fraction(m["file_cache"] + m["key_cache"], self.B) for m in mem}
        M = per_user_M.pop() if len(per_user_M) == 1 else None
        delivery_bits = self.transcript.phase_bits(Phase.DELIVERY)
        R = Fraction(delivery_bits, self.B)
        M_formula = tradeoff.memory(cfg.U, cfg.N, cfg.l)
        R_formula = tradeoff.load(cfg.U, cfg.l)
        try:
            l_inv = tradeoff.l_of_memory(cfg.U, cfg.N, float(M_formula))
            R_thm = tradeoff.theorem_load(cfg.U, cfg.N, float(M_formula))
        except tradeoff.OutOfRange:
            l_inv, R_thm = "out-of-range", "out-of-range"
        R_cmp = tradeoff.comparison_load(cfg.U, cfg.N, float(M_formula) + 1)
        decodes = {
            u: (self.decoded.get(u) is not None and self.decoded[u] == self.library[self.demands[u]])
            for u in range(cfg.U)
        } if self.demands is not None else {}
        secrets_ = self.secret_key_payloads()
        msk_absent = not any(m.payload in secrets_ for m in self.transcript)
        n_delivery = self.ledger.count(Purpose.DELIVERY)
        expected_delivery = cfg.U * math.comb(cfg.U - 1, cfg.l)
        invariants = {
            "memory_exact": M == M_formula,
            "load_exact": self.demands is not None and R == R_formula,
            "decode_ok": bool(decodes) and all(decodes.values()),
            "keys_agree": self.keys_agree(),
            "secret_keys_absent": msk_absent,
            "ledger_delivery_count": n_delivery == expected_delivery,
        }
        return {
            "config": {
                "U": cfg.U, "N": cfg.N, "l": cfg.l, "L": cfg.L, "T": cfg.T, "slots": cfg.slots,
                "seed": cfg.seed, "schedule": [sorted(A) for A in cfg.update_sets()],
                "demands": list(self.demands) if self.demands is not None else None,
            },
            "ramp": {"r": self.params.r, "m": self.params.m, "k": self.params.k},
            "B": self.B,
            "share_bits": cfg.share_bits,
            "memory": {
                "measured": str(M) if M is not None else "inconsistent",
                "formula": str(M_formula),
                "file_cache_bits": mem[0]["file_cache"],
                "key_cache_bits": mem[0]["key_cache"],
                "renewal_key_bits": mem[0]["renewal_keys"],
                "key_storage_bits": mem[0]["key_storage"],
            },
            "load": {
                "measured": str(R),
                "formula": str(R_formula),
                "theorem": R_thm if isinstance(R_thm, str) else round(R_thm, 12),
                "l_inverse": l_inv if isinstance(l_inv, str) else round(l_inv, 12),
                "comparison_at_M_plus_1": round(R_cmp, 12),
                "delivery_bits": delivery_bits,
            },
            "transcript": {
                "messages": len(self.transcript),
                "bits_by_phase": {p.value: self.transcript.phase_bits(p) for p in Phase},
                "digest": self.transcript.digest(),
            },
            "ledger": {"contexts": len(self.ledger), "delivery": n_delivery, "expected_delivery": expected_delivery},
            "decode": {str(u): ok for u, ok in decodes.items()},
            "invariants": invariants,
            "ok": all(invariants.values()),
        }
