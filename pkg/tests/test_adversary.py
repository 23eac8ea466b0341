import dataclasses
import random

import pytest
from hypothesis import given, settings, strategies as st

from procache import adversary as adv
from procache.field import field_for
from procache.netsim import Phase, unpack_elements
from procache.protocol import FaultHooks, Simulation, SystemConfig
from procache.ramp import RampParams, Share, ShareId

import oracles

TINY = SystemConfig(U=4, N=4, l=1, L=3, T=2, seed=5)


@pytest.fixture(scope="module")
def tiny():
    sim = Simulation(TINY)
    rec = adv.EpochRecorder()
    sim.run(on_epoch=rec)
    return sim, rec


class TestVerdict:
    def test_one_candidate_is_broken(self):
        assert adv.verdict_from_counts({(0,): 0, (1,): 3}) == adv.BROKEN

    def test_uniform_is_private(self):
        assert adv.verdict_from_counts({(0,): 2, (1,): 2}) == adv.FULLY_PRIVATE

    def test_between(self):
        assert adv.verdict_from_counts({(0,): 1, (1,): 2, (2,): 0}) == adv.PARTIALLY_LEAKED


class TestSnapshot:
    def test_one_share_of_file0(self, tiny):
        sim, _ = tiny
        view = adv.CuriousView()
        got = adv.snapshot(view, sim.users, 0, 2, lambda sid: sid.file == 0)
        assert len(got) == 1 and got[0].id == ShareId(0, (0,), 0)
        assert view.schedule == [(0, 2, "filtered")]

    def test_only_file_cache_is_captured(self, tiny):
        _, rec = tiny
        for view in rec.views.values():
            assert all(isinstance(s, Share) for s in view.captured.values())

    def test_epoch_tags_change_after_update(self, tiny):
        _, rec = tiny
        sid = ShareId(0, (1,), 0)
        a, b = rec.share(0, sid), rec.share(1, sid)
        assert (a.epoch, b.epoch) == (0, 1)

    def test_future_share_rejected(self, tiny):
        sim, _ = tiny
        with pytest.raises(ValueError):
            adv.snapshot(adv.CuriousView(), sim.users, 0, 1)


class TestReconstructAttack:
    def test_full_capture_before_renewal(self, tiny):
        sim, rec = tiny
        report = adv.attempt_reconstruct(rec.views[0], 0, sim.params, sim.assignment, sim.B)
        assert report.verdict == adv.BROKEN and report.detail["reconstructed"]

    def test_cross_epoch_capture(self, tiny):
        sim, rec = tiny
        sched = {((0,), 0): 0, ((1,), 0): 0, ((2,), 0): 1, ((3,), 0): 1}
        view = adv.view_for_schedule(rec, 0, sched)
        report = adv.attempt_reconstruct(view, 0, sim.params, sim.assignment)
        assert report.verdict != adv.BROKEN and report.nonzero > 1

    def test_r_shares_private(self, tiny):
        sim, rec = tiny
        view = adv.CuriousView()
        view.add(rec.share(2, ShareId(0, (3,), 0)))
        assert adv.attempt_reconstruct(view, 0, sim.params, sim.assignment).verdict == adv.FULLY_PRIVATE

    def test_capturing_more_than_one_share_per_point_across_epochs_leaks(self, tiny):
        # three points at one epoch plus three at the next pin the file:
        # differences between epochs are known at the shared points
        sim, rec = tiny
        view = adv.CuriousView()
        for epoch, users in ((0, (0, 1, 2)), (1, (1, 2, 3))):
            for u in users:
                view.add(rec.share(epoch, ShareId(0, (u,), 0)))
        report = adv.attempt_reconstruct(view, 0, sim.params, sim.assignment)
        assert report.verdict == adv.BROKEN


class TestMixedCounting:
    P = RampParams(1, 4, 4, field_for(3))
    A = {((u,), 0): u + 1 for u in range(4)}
    # epoch 0: (5,1,6,3); epoch 1: (2,1,6,3)
    E0 = [Share(ShareId(0, (0,), 0), 0, (1,)), Share(ShareId(0, (1,), 0), 0, (7,))]
    E1 = [Share(ShareId(0, (2,), 0), 1, (5,)), Share(ShareId(0, (3,), 0), 1, (0,))]

    def test_product_matches_joint_enumeration(self):
        got = adv.mixed_epoch_counts(self.E0 + self.E1, self.P, self.A)
        want = oracles.brute_joint_counts([[(1, 1), (2, 7)], [(3, 5), (4, 0)]], 1, 4, 3, 0xB)
        assert got == want

    def test_frozen_cross_epoch_profile(self):
        # frozen from oracles.brute_joint_counts
        got = adv.mixed_epoch_counts(self.E0 + self.E1, self.P, self.A)
        assert sum(1 for c in got.values() if c) == 8 and got[(1, 6, 3)] == 1

    def test_over_capture_matches_enumeration(self):
        f = field_for(3)
        e0 = [Share(ShareId(0, (u,), 0), 0, (f.eval_poly([5, 1, 6, 3], u + 1),)) for u in (0, 1, 2)]
        e1 = [Share(ShareId(0, (u,), 0), 1, (f.eval_poly([2, 1, 6, 3], u + 1),)) for u in (1, 2, 3)]
        got = adv.mixed_epoch_counts(e0 + e1, self.P, self.A)
        assert [s for s, c in got.items() if c] == [(1, 6, 3)]


def test_proactive_sweep_never_broken(tiny):
    sim, rec = tiny
    results = list(adv.proactive_sweep(rec, 0, sim.params, sim.assignment))
    assert len(results) == 3**4 - 3
    assert all(r.verdict != adv.BROKEN and r.nonzero > 1 for _, r in results)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), data=st.data())
def test_mixed_views_never_concentrate(seed, data):
    sim = Simulation(dataclasses.replace(TINY, seed=seed))
    rec = adv.EpochRecorder(0)
    sim.run(on_epoch=rec)
    epochs = [data.draw(st.sampled_from([0, 1, 2])) for _ in range(4)]
    if len(set(epochs)) == 1:
        epochs[0] = (epochs[0] + 1) % 3
    sched = dict(zip(sorted(sim.assignment), epochs))
    report = adv.attempt_reconstruct(adv.view_for_schedule(rec, 0, sched), 0, sim.params, sim.assignment)
    assert report.nonzero > 1


class TestUserPrivacy:
    def test_user0_file1(self, tiny):
        sim, _ = tiny
        report = adv.user_privacy_audit(sim, 0, 1)
        assert report.verdict == adv.FULLY_PRIVATE and report.detail["shares_visible"] == 1

    def test_every_pair(self, tiny):
        sim, _ = tiny
        for u in range(4):
            for n in range(4):
                if n != sim.demands[u]:
                    assert adv.user_privacy_audit(sim, u, n).verdict == adv.FULLY_PRIVATE

    def test_undelivered_file(self):
        sim = Simulation(SystemConfig(U=4, N=6, l=1, L=3, seed=2))
        sim.run()
        assert adv.user_privacy_audit(sim, 2, 5).verdict == adv.FULLY_PRIVATE

    def test_demanded_file_is_not_audited(self, tiny):
        sim, _ = tiny
        with pytest.raises(ValueError):
            adv.user_privacy_audit(sim, 1, 1)

    def test_receiver_learns_its_demand(self, tiny):
        # sanity check of the audit machinery: run against the demanded
        # file it recovers every share and reports broken
        sim, _ = tiny
        d = sim.demands
        state = sim.users[0]
        known = {s.id: s for s in sim.received_shares(0)} | {s.id: s for s in state.shares_of(d[0])}
        counts = adv.count_consistent_secrets(list(known.values()), sim.params, sim.assignment)
        assert adv.verdict_from_counts(counts) == adv.BROKEN


class TestEavesdropper:
    def test_honest_run(self):
        eve = adv.EavesdropperView()
        sim = Simulation(SystemConfig(U=4, N=4, l=2, L=8, T=1), taps=[(eve.observe, None)])
        sim.run()
        report = adv.eavesdropper_audit(eve, sim.ledger, sim.secret_key_payloads())
        assert report.verdict == adv.FULLY_PRIVATE and report.detail["symbols"] == 12

    def test_reused_context_is_broken(self):
        eve = adv.EavesdropperView()
        sim = Simulation(SystemConfig(U=4, N=4, l=1, L=8))
        sim.net.attach_tap(eve.observe)
        sim.run()
        dup = eve.delivery()[0]
        eve.messages.append(dup)
        assert adv.eavesdropper_audit(eve, sim.ledger).verdict == adv.BROKEN

    def test_unrecorded_context_is_broken(self):
        eve = adv.EavesdropperView()
        sim = Simulation(SystemConfig(U=3, N=3, l=1, L=8), taps=[(eve.observe, [Phase.DELIVERY])])
        sim.run()
        assert adv.eavesdropper_audit(eve, type(sim.ledger)()).verdict == adv.BROKEN

    def test_exposed_key_is_broken(self):
        eve = adv.EavesdropperView()
        sim = Simulation(SystemConfig(U=3, N=3, l=1, L=8), taps=[(eve.observe, None)])
        sim.run()
        leaked = {eve.messages[0].payload}
        assert adv.eavesdropper_audit(eve, sim.ledger, leaked).verdict == adv.BROKEN

    def test_ideal_pad_symbols_uniform(self):
        samples = []
        for seed in range(200):
            sim = Simulation(SystemConfig(U=4, N=4, l=1, L=3, seed=seed, slots=4), FaultHooks(ideal_pads=True))
            sim.run()
            for m in sim.delivery_messages:
                samples.extend(unpack_elements(m.payload, m.pad_bits, 3))
        _, p = adv.pad_uniformity(samples, 3)
        assert len(samples) == 200 * 12 * 4 and p > 0.01

    def test_uniformity_test_detects_bias(self):
        rng = random.Random(0)
        samples = [rng.choice([0, 0, 1, 2, 3, 4, 5, 6, 7]) for _ in range(10_000)]
        assert adv.pad_uniformity(samples, 3)[1] < 0.01


def test_record_format(tiny):
    sim, rec = tiny
    report = adv.attempt_reconstruct(rec.views[0], 0, sim.params, sim.assignment)
    out = report.record(rec.views[0].schedule)
    assert list(out) == ["mode", "schedule", "counts", "verdict", "detail"]
    assert out["verdict"] == adv.BROKEN and len(out["schedule"]) == 16
