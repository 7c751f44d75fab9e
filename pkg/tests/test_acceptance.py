"""Acceptance criteria, one test per criterion (criteria 4 and 5 have sub-checks).

Each test prints a single ``[criterion N] PASS|FAIL ...`` line; the lines are
also repeated in the terminal summary (see conftest.py).
"""

import copy
import random
import time

import pytest

from tendersim.core import QuorumParams, Tag, Value
from tendersim.harness import (
    AdversarySpec,
    Scenario,
    check_agreement,
    check_integrity,
    check_lock_safety,
    check_termination,
    check_validity,
    fit_line,
    fit_power_law,
    measure,
    randomized_scenario,
    run_scenario,
    simulate,
)
from tendersim.msgstore import MessageStore
from tendersim.scenario import dump_report
from tendersim.trace import EFFECT, SEND, TraceRecord

from oracles import first_per_key, happy_path_es_epoch, random_deliveries, ref_decision, ref_jump, ref_quorum_value

SIZES = (4, 7, 10, 13)
SAFETY_SEEDS = 1000
REPORT: list = []
STORE_PEAKS: dict = {}  # criterion label -> list of (n, peak)


def report(label, ok, detail):
    line = f"[criterion {label}] {'PASS' if ok else 'FAIL'} {detail}"
    REPORT.append(line)
    print(line)
    return ok


def note_peaks(label, n, trace):
    STORE_PEAKS.setdefault(label, []).extend((n, p) for p in trace.store_peaks.values())


def pre_proposed(trace):
    return next(r.msg.value for r in trace.records if r.kind == SEND and r.msg.tag is Tag.PRE_PROPOSE)


@pytest.mark.parametrize("variant", ["sync", "es"])
def test_criterion_1_happy_path(variant):
    start = time.perf_counter()
    trace = simulate(Scenario(variant=variant, n=4, f=1))
    elapsed = time.perf_counter() - start
    note_peaks("1", 4, trace)
    v = pre_proposed(trace)
    got = {d.src: (d.epoch, d.value) for d in trace.decisions()}
    ok = got == {i: (0, v) for i in range(4)} and elapsed < 1.0
    assert report(f"1/{variant}", ok, f"decisions={sorted((k, e, str(x)) for k, (e, x) in got.items())} "
                  f"runtime={elapsed:.3f}s"), got


def test_criterion_2_safety_sweep():
    start = time.perf_counter()
    failures, runs = [], 0
    for variant in ("sync", "es"):
        for seed in range(SAFETY_SEEDS):
            s = randomized_scenario(variant, seed)
            trace = simulate(s)
            note_peaks("2", s.n, trace)
            runs += 1
            for check in (check_agreement(trace), check_validity(trace), check_integrity(trace),
                          check_lock_safety(trace, s.q)):
                if not check:
                    failures.append((variant, seed, check.name, check.detail))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120
    assert report("2", ok, f"runs={runs} violations={len(failures)} runtime={elapsed:.1f}s"), failures[:5]


@pytest.mark.parametrize("variant", ["sync", "es"])
def test_criterion_3_silent_proposer(variant):
    s = Scenario(variant=variant, adversary=AdversarySpec.of("silent", byzantine=[0]))
    trace = simulate(s)
    note_peaks("3", 4, trace)
    verdict = check_termination(trace, max_epochs=1)
    epochs = sorted({d.epoch for d in trace.decisions()})
    assert report(f"3/{variant}", bool(verdict), f"decision epochs={epochs} {verdict.detail}")


@pytest.fixture(scope="module")
def worst_case_rows():
    template = Scenario(adversary=AdversarySpec.of("worst_case"), tau_auto=True, horizon=200_000)
    rows = []
    for n in SIZES:
        trace = simulate(template.with_size(n))
        note_peaks("4", n, trace)
        rows.append((n, (n - 1) // 3, trace, measure(trace)))
    return rows


def test_criterion_4a_worst_case_all_decide(worst_case_rows):
    decided = {n: m.decided_all for n, _, _, m in worst_case_rows}
    assert report("4a", all(decided.values()), f"decided_all={decided}")


def test_criterion_4b_decision_epoch_linear_in_f(worst_case_rows):
    fs = [f for _, f, _, _ in worst_case_rows]
    epochs = [m.decision_epoch for *_, m in worst_case_rows]
    slope, _ = fit_line(fs, epochs)
    assert report("4b", slope > 0.8, f"f={fs} decision_epoch={epochs} slope={slope:.3f} (> 0.8)")


def test_criterion_4c_total_messages_cubic(worst_case_rows):
    ns = [n for n, *_ in worst_case_rows]
    totals = [m.messages_total for *_, m in worst_case_rows]
    k, c = fit_power_law(ns, totals)
    assert report("4c", 2.5 <= k <= 3.5, f"n={ns} messages_total={totals} exponent={k:.3f} in [2.5, 3.5]")


@pytest.fixture(scope="module")
def happy_rows():
    rows = []
    for n in SIZES:
        trace = simulate(Scenario().with_size(n))
        note_peaks("5", n, trace)
        rows.append((n, measure(trace).messages_per_epoch[0]))
    return rows


def test_criterion_5a_per_epoch_exact(happy_rows):
    expected = [happy_path_es_epoch(n) for n, _ in happy_rows]
    got = [c for _, c in happy_rows]
    assert report("5a", got == expected, f"messages_per_epoch[0]={got} enumeration={expected}")


def test_criterion_5b_per_epoch_exponent(happy_rows):
    k, _ = fit_power_law([n for n, _ in happy_rows], [c for _, c in happy_rows])
    # Known red: the exact enumeration is cubic, see the decision ledger.
    assert report("5b", 1.8 <= k <= 2.2, f"fitted exponent={k:.3f} required [1.8, 2.2]")


def _refill_peaks():
    """Recreate the traces of criteria 1-3 when this test runs on its own."""
    if "1" not in STORE_PEAKS:
        for variant in ("sync", "es"):
            note_peaks("1", 4, simulate(Scenario(variant=variant)))
    if "2" not in STORE_PEAKS:
        for variant in ("sync", "es"):
            for seed in range(SAFETY_SEEDS):
                note_peaks("2", 4, simulate(randomized_scenario(variant, seed)))
    if "3" not in STORE_PEAKS:
        for variant in ("sync", "es"):
            note_peaks("3", 4, simulate(Scenario(variant=variant, adversary=AdversarySpec.of("silent", byzantine=[0]))))


def test_criterion_6_storage_bound(worst_case_rows, happy_rows):
    _refill_peaks()
    wanted = {"1", "2", "3", "4", "5"}
    missing = wanted - STORE_PEAKS.keys()
    worst = {}
    for label, pairs in STORE_PEAKS.items():
        worst[label] = max(p - (4 * n + 1) for n, p in pairs)
    ok = not missing and all(gap <= 0 for gap in worst.values())
    detail = " ".join(f"c{k}:max(peak-(4n+1))={v}" for k, v in sorted(worst.items()))
    assert report("6", ok, detail + (f" missing={sorted(missing)}" if missing else ""))


def test_criterion_7_dedup_oracle():
    q = QuorumParams(4, 1)
    mismatches = 0
    for seed in range(10_000):
        rng = random.Random(seed)
        deliveries = random_deliveries(rng, length=rng.randint(1, 40))
        store = MessageStore()
        accepted = [(m, s) for m, s in deliveries if store.insert(m, s)]
        kept = first_per_key(deliveries)
        same = accepted == kept and len(store) == len(kept)
        same = same and all(store.get(m.tag, m.height, m.epoch, s, m.hb_round) is m for m, s in kept)
        for e in range(3):
            for tag in ("PROPOSE", "VOTE"):
                same = same and store.quorum_value(Tag(tag), 0, e, q) == ref_quorum_value(kept, tag, 0, e, q.f)
        same = same and store.precommit_quorum_any_epoch(0, q) == ref_decision(kept, 0, q.f)
        same = same and store.jump_target(0, 0, q) == ref_jump(kept, 0, 0, q.f)
        mismatches += not same
    assert report("7", mismatches == 0, f"sequences=10000 mismatches={mismatches}")


def test_criterion_8_determinism():
    scenarios = [
        Scenario(),
        Scenario(variant="sync"),
        Scenario(adversary=AdversarySpec.of("silent", byzantine=[0])),
        Scenario(adversary=AdversarySpec.of("worst_case"), tau_auto=True, horizon=100_000).with_size(7),
    ] + [randomized_scenario(v, seed) for v in ("sync", "es") for seed in (3, 17, 99)]
    diverged = []
    for s in scenarios:
        a, b = run_scenario(s), run_scenario(s)
        if a.trace.dumps() != b.trace.dumps() or dump_report(a, True) != dump_report(b, True):
            diverged.append(s)
    assert report("8", not diverged, f"scenarios={len(scenarios)} diverged={len(diverged)}")


def _mutants(base):
    decisions = [r for r in base.records if r.kind == EFFECT and r.effect == "decide"]
    v = decisions[0].value

    double = copy.deepcopy(base)
    double.records.append(copy.deepcopy(decisions[1]))

    conflict = copy.deepcopy(base)
    target = next(r for r in conflict.records if r.kind == EFFECT and r.effect == "decide" and r.src == 3)
    target.value = Value("other")

    invalid = copy.deepcopy(base)
    for r in invalid.records:
        if r.kind == EFFECT and r.effect == "decide":
            r.value = Value(v.id, v.payload_bits, valid=False)

    lock = copy.deepcopy(base)
    digest = dict(decisions[2].digest, epoch=1, locked=Value("other"), locked_epoch=1, valid=Value("other"),
                  valid_epoch=1, decision=None)
    lock.records.append(TraceRecord(10_000, EFFECT, 2, effect="enter", round="PRE-PROPOSE", epoch=2, digest=digest))
    return {"integrity": double, "agreement": conflict, "validity": invalid, "lock_safety": lock}


def test_criterion_9_checker_sensitivity():
    q = QuorumParams(4, 1)
    base = simulate(Scenario())
    checkers = {
        "validity": check_validity,
        "agreement": check_agreement,
        "integrity": check_integrity,
        "lock_safety": lambda t: check_lock_safety(t, q),
    }
    assert all(c(base) for c in checkers.values())
    tripped = {}
    for expected, trace in _mutants(base).items():
        tripped[expected] = sorted(name for name, c in checkers.items() if not c(trace))
    ok = all(tripped[name] == [name] for name in tripped)
    assert report("9", ok, " ".join(f"{k}->{v}" for k, v in tripped.items()))
