"""Command-line front end: simulate, sweep, attack, verify.

Exit codes: 0 success, 1 invariant or correctness failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import adversary, tradeoff
from .errors import CapacityError, ConfigurationError, LedgerViolation, ProcacheError
from .protocol import FaultHooks, Simulation, SystemConfig, parse_config

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SWEEP_COLUMNS = ("l", "M", "R_measured", "R_formula", "R_theorem1", "R_lemma1", "l_inverse")
SIMULATE_MAX_U = 8
SCHEDULE_CAP = 100_000


class UsageError(Exception):
    pass


def _load_config(path: str, seed: int | None) -> SystemConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    cfg = parse_config(text)
    return dataclasses.replace(cfg, seed=seed) if seed is not None else cfg


def _out_dir(path: str | None) -> Path:
    out = Path(path or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fmt(x) -> str:
    return "" if x is None else f"{float(x):.9f}"


# -- simulate -------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config, args.seed)
    out = _out_dir(args.out)
    sim = Simulation(cfg)
    try:
        report = sim.run()
    except LedgerViolation as exc:
        print(f"ledger violation: {exc}", file=sys.stderr)
        return EXIT_FAIL
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    with open(out / "transcript.jsonl", "w") as fh:
        sim.transcript.write_jsonl(fh)
    print(
        f"U={cfg.U} N={cfg.N} l={cfg.l} T={cfg.T}: M={report['memory']['measured']} "
        f"R={report['load']['measured']} decode={'ok' if report['invariants']['decode_ok'] else 'FAILED'}"
    )
    failed = [k for k, v in report["invariants"].items() if not v]
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_FAIL


# -- sweep ----------------------------------------------------------------------


def parse_l_range(text: str, U: int) -> range:
    try:
        a, b = (int(x) for x in text.split(".."))
    except ValueError:
        raise UsageError(f"--l-range must look like A..B, got {text!r}") from None
    if not 1 <= a <= b <= U - 1:
        raise UsageError(f"--l-range {text} outside [1, {U - 1}]")
    return range(a, b + 1)


def field_bits_for(U: int, l: int) -> int:
    """Smallest of 8 or 16 bits with enough nonzero points for l*C(U,l) shares."""
    k = l * math.comb(U, l)
    return 8 if k <= 255 else 16


def sweep_rows(U: int, N: int, ls, mode: str, seed: int) -> list[dict]:
    rows = []
    for l in ls:
        M = tradeoff.memory(U, N, l)
        R = tradeoff.load(U, l)
        measured = None
        if mode == "simulate":
            cfg = SystemConfig(U=U, N=N, l=l, L=field_bits_for(U, l), T=1, seed=seed + l)
            report = Simulation(cfg).run()
            if not report["ok"]:
                raise ProcacheError(f"simulation at l={l} violated {report['invariants']}")
            measured = float(Fraction(report["load"]["measured"]))
        try:
            R_thm = tradeoff.theorem_load(U, N, float(M))
            l_inv = tradeoff.l_of_memory(U, N, float(M))
        except tradeoff.OutOfRange:
            R_thm = l_inv = None
        rows.append(
            {
                "l": l,
                "M": M,
                "R_measured": measured,
                "R_formula": R,
                "R_theorem1": R_thm,
                "R_lemma1": tradeoff.comparison_load(U, N, float(M) + 1),
                "l_inverse": l_inv,
            }
        )
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([row["l"]] + [_fmt(row[c]) for c in SWEEP_COLUMNS[1:]])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    U = args.U
    N = args.N if args.N is not None else U
    if U < 2 or N < 1:
        raise UsageError("need U >= 2 and N >= 1")
    ls = parse_l_range(args.l_range, U) if args.l_range else range(1, U)
    if args.mode == "simulate":
        if U > SIMULATE_MAX_U:
            raise UsageError(f"simulate mode is limited to U <= {SIMULATE_MAX_U}; use --mode formula")
        if N < U:
            raise UsageError("simulate mode uses distinct demands and needs N >= U")
    text = rows_to_csv(sweep_rows(U, N, ls, args.mode, args.seed))
    if args.out:
        out = Path(args.out)
        if out.suffix != ".csv":
            out = _out_dir(args.out) / "sweep.csv"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- attack -----------------------------------------------------------------------


def run_attacks(cfg: SystemConfig, target: int = 0) -> list[dict]:
    """Baseline, proactive and audit scenarios; each record says whether broken was expected."""
    if not 0 <= target < cfg.N:
        raise UsageError(f"target file {target} outside [0, {cfg.N})")
    records = []

    def add(scenario, report, schedule, expected_broken):
        rec = report.record(schedule)
        rec["scenario"] = scenario
        rec["expected_broken"] = expected_broken
        rec["unexpected"] = report.verdict == adversary.BROKEN and not expected_broken
        records.append(rec)

    base = Simulation(dataclasses.replace(cfg, T=0, schedule=()))
    rec0 = adversary.EpochRecorder(target)
    base.run(on_epoch=rec0)
    add(
        "baseline-full-capture",
        adversary.attempt_reconstruct(rec0.views[0], target, base.params, base.assignment, base.B),
        rec0.views[0].schedule,
        True,
    )

    sim = Simulation(cfg)
    eve = adversary.EavesdropperView()
    sim.net.attach_tap(eve.observe)
    recorder = adversary.EpochRecorder(target)
    sim.run(on_epoch=recorder)
    if cfg.T >= 1:
        touched = {0} | {t for t, A in enumerate(cfg.update_sets(), 1) if target in A}
        if len(touched) < 2:
            print(f"target file {target} is never renewed; proactive scenario skipped", file=sys.stderr)
        else:
            recorder.views = {t: v for t, v in recorder.views.items() if t in touched}
            n_sched = len(touched) ** sim.params.k
            if n_sched > SCHEDULE_CAP:
                raise CapacityError(f"{n_sched} capture schedules exceed the cap of {SCHEDULE_CAP}")
            for schedule, report in adversary.proactive_sweep(recorder, target, sim.params, sim.assignment):
                add("proactive-cross-epoch", report, sorted((list(T), i, e) for (T, i), e in schedule.items()), False)

    for u in range(cfg.U):
        for n in range(cfg.N):
            if n != sim.demands[u]:
                add("user-privacy", adversary.user_privacy_audit(sim, u, n), [u, n], False)
    add("eavesdropper", adversary.eavesdropper_audit(eve, sim.ledger, sim.secret_key_payloads()), "delivery", False)
    return records


def cmd_attack(args) -> int:
    cfg = _load_config(args.config, args.seed)
    records = run_attacks(cfg, args.file)
    out = _out_dir(args.out)
    with open(out / "attacks.jsonl", "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")
    tally: dict[tuple[str, str], int] = {}
    for rec in records:
        tally[(rec["scenario"], rec["verdict"])] = tally.get((rec["scenario"], rec["verdict"]), 0) + 1
    for (scenario, verdict), n in sorted(tally.items()):
        print(f"{scenario:24s} {verdict:17s} {n}")
    unexpected = [r for r in records if r["unexpected"]]
    if unexpected:
        print(f"{len(unexpected)} unexpected broken verdict(s)", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- verify -----------------------------------------------------------------------


def _check_field() -> bool:
    from .field import field_for
    from . import _purekernels, kernels

    f = field_for(3)
    els = range(8)
    for a in els:
        if a and f.mul(a, f.inv(a)) != 1:
            return False
        for b in els:
            if f.mul(a, b) != f.mul(b, a):
                return False
            if _purekernels.mul(a, b, 3, f.low) != kernels.mul(a, b, 3, f.low):
                return False
            for c in els:
                if f.mul(a, f.mul(b, c)) != f.mul(f.mul(a, b), c):
                    return False
                if f.mul(a, b ^ c) != f.mul(a, b) ^ f.mul(a, c):
                    return False
    return True


def _check_ramp() -> bool:
    import itertools
    import random

    from .field import field_for
    from .ramp import RampParams, ShareId, count_consistent_secrets, encode_file, make_shares, packetize

    params = RampParams(1, 4, 4, field_for(3))
    assignment = {((u,), 0): u + 1 for u in range(4)}
    rng = random.Random(7)
    bits = tuple(rng.getrandbits(1) for _ in range(9))
    shares = make_shares(encode_file(packetize(bits, params), params, rng), assignment, 0, 0)
    for size in range(5):
        for sub in itertools.combinations(shares, size):
            counts = count_consistent_secrets(list(sub), params, assignment)
            verdict = adversary.verdict_from_counts(counts)
            want = adversary.FULLY_PRIVATE if size <= 1 else adversary.BROKEN if size >= 4 else adversary.PARTIALLY_LEAKED
            if verdict != want:
                return False
    return True


def _check_key_agreement() -> bool:
    from .groupkey import TOY_GROUP

    q, g = TOY_GROUP.q, TOY_GROUP.g
    return pow(pow(g, 3, q), 5, q) == 16 == pow(pow(g, 5, q), 3, q)


def _check_run(cfg: SystemConfig, hooks: FaultHooks | None, failed: list[str], tag: str) -> None:
    try:
        report = Simulation(cfg, hooks).run()
    except LedgerViolation:
        failed.append(f"{tag}:ledger_one_time_use")
        return
    for name, ok in report["invariants"].items():
        if not ok:
            failed.append(f"{tag}:{name}")


def verify(inject: str | None = None) -> list[str]:
    failed = []
    for name, check in (("field_axioms", _check_field), ("ramp_thresholds", _check_ramp), ("key_agreement_vector", _check_key_agreement)):
        if not check():
            failed.append(name)
    hooks = None
    if inject == "pad-reuse":
        hooks = FaultHooks(reuse_delivery_context=True)
    elif inject == "wrong-point-index":
        hooks = FaultHooks(wrong_point_index=True)
    runs = {
        "U4-l1": SystemConfig(U=4, N=4, l=1, L=8, T=1, schedule=(frozenset({0}),), seed=1),
        "U5-l2": SystemConfig(U=5, N=5, l=2, L=8, T=2, seed=2),
        "U6-l3": SystemConfig(U=6, N=6, l=3, L=8, T=1, seed=3),
    }
    for tag, cfg in runs.items():
        _check_run(cfg, hooks, failed, tag)
    return failed


def cmd_verify(args) -> int:
    start = time.perf_counter()
    failed = verify(args.inject)
    elapsed = time.perf_counter() - start
    for name in failed:
        print(f"FAIL {name}")
    print(f"{'verify failed' if failed else 'all invariants hold'} ({elapsed:.1f}s)")
    return EXIT_FAIL if failed else EXIT_OK


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="procache", description="Proactive secure D2D coded caching simulator")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run one scenario end to end")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=".")
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("sweep", help="memory/load trade-off table as CSV")
    s.add_argument("--U", type=int, required=True)
    s.add_argument("--N", type=int)
    s.add_argument("--l-range", dest="l_range")
    s.add_argument("--mode", choices=("simulate", "formula"), default="formula")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("attack", help="capture schedules and privacy audits")
    s.add_argument("--config", required=True)
    s.add_argument("--out", default=".")
    s.add_argument("--seed", type=int)
    s.add_argument("--file", type=int, default=0, help="target file of the curious attacker")
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("verify", help="built-in invariant suite")
    s.add_argument("--inject", choices=("pad-reuse", "wrong-point-index"))
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ConfigurationError, CapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProcacheError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
