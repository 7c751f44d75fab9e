import copy
import math

import pytest

from tendersim.core import NEVER, Message, QuorumParams, Tag, Value
from tendersim.harness import (
    AdversarySpec,
    Scenario,
    ScenarioError,
    check_agreement,
    check_all,
    check_integrity,
    check_lock_safety,
    check_termination,
    check_validity,
    field_bits,
    fit_line,
    fit_power_law,
    happy_path_epoch_messages,
    measure,
    message_bits,
    run_scenario,
    simulate,
    sweep,
)
from tendersim.trace import EFFECT, SEND, Trace, TraceRecord

from oracles import happy_path_es_epoch, happy_path_sync_epoch


@pytest.fixture(scope="module")
def happy():
    return simulate(Scenario())


def decide(trace, src, value, epoch=0):
    digest = {"epoch": epoch, "locked": value, "locked_epoch": epoch, "valid": value,
              "valid_epoch": epoch, "decision": value}
    trace.records.append(TraceRecord(999, EFFECT, src, effect="decide", epoch=epoch, value=value, digest=digest))


def empty_trace(**kw):
    return Trace("es", 4, 1, (), **kw)


class TestValidity:
    def test_happy(self, happy):
        assert check_validity(happy)

    def test_nil_decision(self, happy):
        t = copy.deepcopy(happy)
        decide(t, 0, None)
        assert not check_validity(t)

    def test_vacuous(self):
        assert check_validity(empty_trace())


class TestAgreement:
    def test_same_value(self, v):
        t = empty_trace()
        for p in range(4):
            decide(t, p, v)
        assert check_agreement(t)

    def test_conflict(self, v, w):
        t = empty_trace()
        decide(t, 0, v)
        decide(t, 1, w)
        assert not check_agreement(t)

    def test_partial_decision_at_horizon(self, v):
        t = empty_trace(terminated=False)
        decide(t, 0, v)
        assert check_agreement(t)
        assert not check_termination(t)

    def test_byzantine_decisions_ignored(self, v, w):
        t = Trace("es", 4, 1, (3,))
        decide(t, 0, v)
        decide(t, 3, w)
        assert check_agreement(t)


class TestIntegrity:
    def test_double_decide(self, happy):
        t = copy.deepcopy(happy)
        decide(t, 2, t.decisions()[0].value)
        assert not check_integrity(t)

    def test_normal_and_empty(self, happy):
        assert check_integrity(happy) and check_integrity(empty_trace())


class TestLockSafety:
    def test_happy(self, happy):
        assert check_lock_safety(happy, QuorumParams(4, 1))

    def test_single_lock_is_vacuous(self):
        trace = simulate(Scenario(variant="sync", adversary=AdversarySpec.of("split_locker", byzantine=[0], targets=[2], epochs=[0])))
        assert check_lock_safety(trace, QuorumParams(4, 1))

    def _locked(self, t, src, epoch, value, locked_epoch):
        digest = {"epoch": epoch, "locked": value, "locked_epoch": locked_epoch, "valid": value,
                  "valid_epoch": locked_epoch, "decision": None}
        t.records.append(TraceRecord(epoch * 100, EFFECT, src, effect="enter", round="PRE-PROPOSE",
                                     epoch=epoch + 1, digest=digest))

    def test_later_conflicting_lock(self, v, w):
        t = empty_trace()
        self._locked(t, 0, 0, v, 0)
        self._locked(t, 1, 0, v, 0)
        self._locked(t, 2, 3, w, 2)
        assert not check_lock_safety(t)

    def test_older_conflicting_lock_is_fine(self, v, w):
        t = empty_trace()
        self._locked(t, 0, 2, v, 2)
        self._locked(t, 1, 2, v, 2)
        self._locked(t, 2, 3, w, 1)
        assert check_lock_safety(t)

    def test_locked_member_proposes_other_value(self, v, w):
        t = empty_trace()
        self._locked(t, 0, 0, v, 0)
        self._locked(t, 1, 0, v, 0)
        t.records.append(TraceRecord(500, SEND, 1, 2, Message.propose(0, 4, w), 1, 500))
        assert not check_lock_safety(t)

    def test_relay_is_not_a_proposal(self, v, w):
        t = empty_trace()
        self._locked(t, 0, 0, v, 0)
        self._locked(t, 1, 0, v, 0)
        t.records.append(TraceRecord(500, SEND, 1, 2, Message.propose(0, 4, w), 3, 500))
        assert check_lock_safety(t)


class TestTermination:
    def test_happy(self, happy):
        assert check_termination(happy, 0)

    def test_silent_proposer(self):
        trace = simulate(Scenario(adversary=AdversarySpec.of("silent", byzantine=[0])))
        assert check_termination(trace, 1)
        assert not check_termination(trace, 0)

    def test_truncated(self):
        trace = simulate(Scenario(adversary=AdversarySpec.of("silent", byzantine=[0]), horizon=30))
        verdict = check_termination(trace)
        assert not verdict and "undecided" in verdict.detail


class TestPurity:
    def test_checkers_repeatable(self, happy):
        before = happy.dumps()
        first = check_all(happy, QuorumParams(4, 1), 0)
        assert check_all(happy, QuorumParams(4, 1), 0) == first
        assert happy.dumps() == before


class TestMetrics:
    def test_enumeration_oracle(self):
        for n in (4, 7, 10, 13):
            assert happy_path_epoch_messages(n, "es") == happy_path_es_epoch(n)
            assert happy_path_epoch_messages(n, "sync") == happy_path_sync_epoch(n)
        assert happy_path_es_epoch(4) == 99

    def test_happy_epoch_count(self, happy):
        m = measure(happy)
        assert m.messages_per_epoch == {0: 99}
        assert sum(m.messages_per_epoch.values()) == m.messages_total
        assert m.decided_all and m.decision_epoch == 0

    def test_storage_bound(self, happy):
        assert set(measure(happy).stored_messages_peak_per_validator.values()) == {17}

    def test_sync_cheaper_without_faults(self):
        sync_trace = simulate(Scenario(variant="sync", f=0))
        assert measure(sync_trace).messages_per_epoch[0] == happy_path_sync_epoch(4) == 75
        assert not any(r.msg.tag is Tag.HEARTBEAT for r in sync_trace.of_kind(SEND))
        assert happy_path_sync_epoch(4) < happy_path_es_epoch(4)
        assert measure(simulate(Scenario(variant="sync"))).messages_total < measure(simulate(Scenario())).messages_total

    def test_es_with_no_faults_short_circuits(self):
        # with f=0 a validator's own message is a quorum, so rounds end before
        # peers' proposals arrive and VOTE-round relays shrink
        es = measure(simulate(Scenario(variant="es", f=0)))
        assert es.decided_all and es.messages_per_epoch[0] < happy_path_es_epoch(4)

    def test_bits(self, happy):
        # one ES epoch at n=4: 3 pre-proposals with valid_epoch, 45 value messages, 24 heartbeats... by clause
        width = field_bits(1)
        assert width == 8
        pre = message_bits(Message.pre_propose(0, 0, Value("v"), NEVER), 64, width)
        val = message_bits(Message.vote(0, 0, Value("v")), 64, width)
        hb = message_bits(Message.heartbeat(Tag.VOTE, 0, 0), 64, width)
        assert (pre, val, hb) == (2 + 8 + 8 + 64 + 8, 2 + 8 + 8 + 64, 2 + 8 + 8)
        n = 4
        expected = 3 * pre + (n * 3 + n * n * 3 + n * 3) * val + 2 * n * 3 * hb
        assert measure(happy).bits_total == expected

    def test_field_width_grows_logarithmically(self):
        assert [field_bits(e) for e in (1, 256, 257, 5000)] == [8, 8, 9, 13]


class TestFits:
    def test_power_law(self):
        xs = [4, 7, 10, 13]
        k, c = fit_power_law(xs, [5 * x**3 for x in xs])
        assert math.isclose(k, 3) and math.isclose(c, 5)

    def test_line(self):
        assert fit_line([1, 2, 3], [4, 8, 12]) == pytest.approx((4, 0))


class TestScenario:
    def test_too_many_byzantine(self):
        with pytest.raises(ScenarioError, match="f=1"):
            Scenario(adversary=AdversarySpec.of("silent", byzantine=[0, 1])).validate()

    def test_sweep_sizes_must_be_tight(self):
        with pytest.raises(ScenarioError):
            Scenario().with_size(5)

    def test_bad_variant(self):
        with pytest.raises(ScenarioError):
            Scenario(variant="async").validate()


class TestSweep:
    def test_empty_seed_list(self):
        assert sweep(Scenario(), [4, 7], []) == []

    def test_rows_per_size_and_seed(self):
        rows = sweep(Scenario(), [4, 7], [0, 1])
        assert [(r.n, r.f, r.seed) for r in rows] == [(4, 1, 0), (4, 1, 1), (7, 2, 0), (7, 2, 1)]

    def test_worst_case_monotone(self):
        template = Scenario(adversary=AdversarySpec.of("worst_case"), tau_auto=True, horizon=100_000)
        totals = [r.metrics.messages_total for r in sweep(template, [4, 7, 10], [0])]
        assert totals == sorted(totals) and len(set(totals)) == 3

    def test_run_report(self):
        report = run_scenario(Scenario(max_epochs=0))
        assert report.passed and report.metrics.decided_all
        assert [v.name for v in report.verdicts] == ["validity", "agreement", "integrity", "lock_safety", "termination"]
