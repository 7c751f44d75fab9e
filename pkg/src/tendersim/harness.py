"""Scenario runner, trace property checkers and complexity metrics."""

from __future__ import annotations

import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .adversary import (
    Adversary,
    EquivocatingProposer,
    Silent,
    SplitLocker,
    WorstCase,
)
from .core import QuorumParams, Tag, Value, ValueGenerator, is_valid
from .es_engine import EsEngine
from .net_sim import NetworkConfig, Simulation
from .sync_engine import SyncEngine
from .trace import SEND, Trace

ADVERSARIES = ("none", "silent", "equivocating", "split_locker", "worst_case", "random")


class ScenarioError(ValueError):
    """Inconsistent scenario configuration."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        where = ""
        if field is not None:
            where = f"{field}" + (f" (line {line})" if line is not None else "") + ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class AdversarySpec:
    name: str = "none"
    params: Tuple[Tuple[str, Any], ...] = ()

    @classmethod
    def of(cls, name: str, **params: Any) -> "AdversarySpec":
        return cls(name, tuple(sorted(params.items())))

    def get(self, key: str, default: Any = None) -> Any:
        return dict(self.params).get(key, default)


@dataclass(frozen=True)
class Scenario:
    variant: str = "es"
    n: int = 4
    f: int = 1
    network: NetworkConfig = field(default_factory=NetworkConfig)
    adversary: AdversarySpec = field(default_factory=AdversarySpec)
    timeouts: Tuple[int, int, int] = (30, 30, 30)
    timeout_step: int = 1
    payload_bits: int = 64
    horizon: int = 10_000
    seed: int = 0
    height: int = 0
    tau_auto: bool = False  # let the adversary pick the stabilization time
    max_epochs: Optional[int] = None  # termination bound; None = just "all decide"
    check_termination: bool = True

    @property
    def q(self) -> QuorumParams:
        return QuorumParams(self.n, self.f)

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed, network=replace(self.network, seed=seed))

    def with_size(self, n: int) -> "Scenario":
        if (n - 1) % 3:
            raise ScenarioError(f"sweep sizes must be 3f+1, got {n}", "n")
        return replace(self, n=n, f=(n - 1) // 3)

    def validate(self) -> None:
        if self.variant not in ("sync", "es"):
            raise ScenarioError(f"unknown variant {self.variant!r}", "variant")
        try:
            self.q
        except ValueError as exc:
            raise ScenarioError(str(exc), "n") from None
        if self.adversary.name not in ADVERSARIES:
            raise ScenarioError(f"unknown adversary {self.adversary.name!r}", "adversary.name")
        byz = self.adversary.get("byzantine")
        if byz is not None:
            if len(set(byz)) > self.f:
                raise ScenarioError(
                    f"{len(set(byz))} Byzantine validators but f={self.f}", "adversary.byzantine"
                )
            if any(not 0 <= b < self.n for b in byz):
                raise ScenarioError(f"Byzantine ids {sorted(byz)} outside [0, {self.n})", "adversary.byzantine")
        if min(self.timeouts) <= 0 or self.timeout_step < 0:
            raise ScenarioError("timeouts must be positive", "timeouts")
        if self.horizon <= 0:
            raise ScenarioError("horizon must be positive", "horizon")


def random_adversary(q: QuorumParams, rng: random.Random) -> Adversary:
    """One of silent / equivocating / split_locker with random parameters."""
    byz = sorted(rng.sample(range(q.n), q.f))
    correct = [v for v in range(q.n) if v not in byz]
    kind = rng.choice(("silent", "equivocating", "split_locker"))
    if kind == "silent" or not byz:
        return Silent(byz)
    if kind == "equivocating":
        shuffled = correct[:]
        rng.shuffle(shuffled)
        cut = rng.randint(0, len(shuffled))
        v2 = Value("eqB", valid=rng.random() > 0.2)
        return EquivocatingProposer(
            byz, Value("eqA"), v2, (shuffled[:cut], shuffled[cut:]), collude=rng.random() < 0.5
        )
    targets = rng.sample(correct, rng.randint(1, len(correct)))
    epochs = sorted(rng.sample(range(12), rng.randint(1, 6)))
    return SplitLocker(byz, q, targets, epochs)


def randomized_scenario(variant: str, seed: int, horizon: int = 3000, n: int = 4) -> Scenario:
    """Random catalog adversary with a random stabilization time in [0, horizon/2]."""
    rng = random.Random(f"sweep:{variant}:{seed}")
    network = NetworkConfig(
        tau=rng.randint(0, horizon // 2),
        pre_gst_max=rng.randint(1, 200),
        post_gst=rng.choice(("fixed", "uniform")),
        seed=seed,
    )
    return Scenario(
        variant=variant, n=n, f=(n - 1) // 3, network=network, adversary=AdversarySpec.of("random"),
        horizon=horizon, seed=seed, check_termination=False,
    )


def build_adversary(s: Scenario) -> Adversary:
    spec, q = s.adversary, s.q
    name = spec.name
    default_byz = list(range(q.f))
    if name == "none":
        return Adversary()
    if name == "silent":
        return Silent(spec.get("byzantine", default_byz))
    if name == "equivocating":
        byz = spec.get("byzantine", default_byz)
        correct = [v for v in range(q.n) if v not in byz]
        half = len(correct) // 2
        side_a = spec.get("side_a", correct[:half])
        side_b = spec.get("side_b", [v for v in correct if v not in side_a])
        try:
            return EquivocatingProposer(
                byz, Value("eqA"), Value("eqB"), (side_a, side_b), bool(spec.get("collude", False))
            )
        except ValueError as exc:
            raise ScenarioError(str(exc), "adversary.side_a") from None
    if name == "split_locker":
        byz = spec.get("byzantine", default_byz)
        correct = [v for v in range(q.n) if v not in byz]
        targets = spec.get("targets", correct[:1])
        epochs = spec.get("epochs", [e for e in range(q.n) if q.n and e % q.n in byz][:1] or [0])
        return SplitLocker(byz, q, targets, epochs, spec.get("helpers"))
    if name == "worst_case":
        return WorstCase(q)
    if name == "random":
        return random_adversary(q, random.Random(f"adv:{s.seed}"))
    raise ScenarioError(f"unknown adversary {name!r}", "adversary.name")


def build_simulation(s: Scenario) -> Simulation:
    s.validate()
    q = s.q
    adversary = build_adversary(s)
    network = s.network
    if s.tau_auto and hasattr(adversary, "suggested_tau"):
        network = replace(network, tau=adversary.suggested_tau(s.timeouts, network.delta))
    if isinstance(adversary, WorstCase):
        network = replace(network, pre_gst="adversarial")
    engines = {}
    for v in range(q.n):
        if v in adversary.byzantine:
            continue
        values = ValueGenerator(v, s.seed, s.payload_bits)
        if s.variant == "sync":
            engines[v] = SyncEngine(v, q, height=s.height, delta=network.delta, values=values)
        else:
            engines[v] = EsEngine(
                v, q, height=s.height, timeouts=s.timeouts, timeout_step=s.timeout_step, values=values
            )
    return Simulation(engines, q, network, adversary, s.horizon, s.height)


def simulate(s: Scenario) -> Trace:
    return build_simulation(s).run()


# -- checkers -------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def _correct_decisions(trace: Trace):
    byz = set(trace.byzantine)
    return [r for r in trace.decisions() if r.src not in byz]


def check_validity(trace: Trace) -> Verdict:
    bad = [(r.src, r.value) for r in _correct_decisions(trace) if not is_valid(r.value)]
    if bad:
        return Verdict("validity", False, f"invalid decisions {bad}")
    return Verdict("validity", True)


def check_agreement(trace: Trace) -> Verdict:
    decided = _correct_decisions(trace)
    values = {r.value for r in decided}
    if len(values) > 1:
        return Verdict("agreement", False, f"conflicting decisions {sorted(map(str, values))}")
    if decided and trace.terminated:
        missing = set(trace.correct) - {r.src for r in decided}
        if missing:
            return Verdict("agreement", False, f"validators {sorted(missing)} never decided")
    return Verdict("agreement", True)


def check_integrity(trace: Trace) -> Verdict:
    counts = Counter(r.src for r in _correct_decisions(trace))
    twice = sorted(v for v, c in counts.items() if c > 1)
    if twice:
        return Verdict("integrity", False, f"validators {twice} decided more than once")
    return Verdict("integrity", True)


def check_lock_safety(trace: Trace, q: Optional[QuorumParams] = None) -> Verdict:
    """If f+1 correct validators end epoch e locked on v at e, nobody later locks elsewhere at >= e."""
    f = q.f if q is not None else trace.f
    byz = set(trace.byzantine)
    ends = [
        (r.src, r.digest["epoch"], r.digest["locked"], r.digest["locked_epoch"])
        for r in trace.epoch_ends()
        if r.src not in byz
    ]
    members: Dict[Tuple[Value, int], set] = defaultdict(set)
    for v, e, locked, locked_epoch in ends:
        if locked is not None and locked_epoch == e:
            members[(locked, e)].add(v)
    proposals = [
        (r.src, r.msg.epoch, r.msg.value)
        for r in trace.records
        if r.kind == SEND and r.msg.tag is Tag.PROPOSE and r.signer == r.src and r.src not in byz
    ]
    for (value, e), group in sorted(members.items(), key=lambda kv: (kv[0][1], kv[0][0].id)):
        if len(group) < f + 1:
            continue
        for v, e2, locked, locked_epoch in ends:
            if e2 > e and locked != value and locked_epoch >= e:
                return Verdict(
                    "lock_safety",
                    False,
                    f"validator {v} ended epoch {e2} locked on {locked}@{locked_epoch} "
                    f"after {sorted(group)} locked {value}@{e}",
                )
        for v, e2, proposed in proposals:
            if v in group and e2 > e and proposed != value:
                return Verdict(
                    "lock_safety", False, f"validator {v} locked {value}@{e} proposed {proposed} in epoch {e2}"
                )
    return Verdict("lock_safety", True)


def check_termination(trace: Trace, max_epochs: Optional[int] = None) -> Verdict:
    decided = {r.src: r.epoch for r in _correct_decisions(trace)}
    missing = sorted(set(trace.correct) - set(decided))
    if missing:
        why = "horizon reached" if not trace.terminated else "run ended"
        return Verdict("termination", False, f"{why} at t={trace.end_time}; undecided {missing}")
    worst = max(decided.values(), default=0)
    if max_epochs is not None and worst > max_epochs:
        return Verdict("termination", False, f"decided in epoch {worst} > {max_epochs}")
    return Verdict("termination", True, f"max decision epoch {worst}")


SAFETY_CHECKERS = ("validity", "agreement", "integrity", "lock_safety")


def check_all(trace: Trace, q: Optional[QuorumParams] = None, max_epochs: Optional[int] = None,
              termination: bool = True) -> List[Verdict]:
    verdicts = [check_validity(trace), check_agreement(trace), check_integrity(trace), check_lock_safety(trace, q)]
    if termination:
        verdicts.append(check_termination(trace, max_epochs))
    return verdicts


# -- metrics --------------------------------------------------------------


@dataclass
class Metrics:
    messages_total: int
    messages_per_epoch: Dict[int, int]
    bits_total: int
    stored_messages_peak_per_validator: Dict[int, int]
    decision_epoch_per_validator: Dict[int, int]
    decided_all: bool

    def as_dict(self) -> Dict[str, Any]:
        return {
            "messages_total": self.messages_total,
            "messages_per_epoch": dict(sorted(self.messages_per_epoch.items())),
            "bits_total": self.bits_total,
            "stored_messages_peak_per_validator": dict(sorted(self.stored_messages_peak_per_validator.items())),
            "decision_epoch_per_validator": dict(sorted(self.decision_epoch_per_validator.items())),
            "decided_all": self.decided_all,
        }

    @property
    def decision_epoch(self) -> Optional[int]:
        return max(self.decision_epoch_per_validator.values(), default=None)


def field_bits(epochs: int) -> int:
    """Width of the height and epoch fields for a run spanning ``epochs`` epochs."""
    return max(8, math.ceil(math.log2(max(epochs, 1))))


def message_bits(msg, payload_bits: int, int_bits: int) -> int:
    bits = 2 + 2 * int_bits
    if msg.tag is not Tag.HEARTBEAT:
        bits += payload_bits
    if msg.valid_epoch is not None:
        bits += int_bits
    return bits


def measure(trace: Trace, payload_bits: int = 64) -> Metrics:
    sends = [r.msg for r in trace.records if r.kind == SEND]
    per_epoch = Counter(m.epoch for m in sends)
    epochs = max(per_epoch, default=0) + 1
    width = field_bits(epochs)
    decided = {r.src: r.epoch for r in _correct_decisions(trace)}
    return Metrics(
        messages_total=len(sends),
        messages_per_epoch=dict(sorted(per_epoch.items())),
        bits_total=sum(message_bits(m, payload_bits, width) for m in sends),
        stored_messages_peak_per_validator=dict(trace.store_peaks),
        decision_epoch_per_validator=dict(sorted(decided.items())),
        decided_all=set(decided) >= set(trace.correct),
    )


def happy_path_epoch_messages(n: int, variant: str = "es") -> int:
    """Network messages in one fault-free epoch, counted send clause by send clause."""
    fanout = n - 1
    pre = fanout  # the proposer's pre-proposal
    if variant == "es":
        propose = n * (fanout + fanout)  # proposal + heartbeat
        vote = n * n * fanout + n * fanout + n * fanout  # relays of n proposals + vote + heartbeat
    else:
        propose = n * fanout
        vote = n * n * fanout + n * fanout
    return pre + propose + vote


def fit_power_law(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    """Least-squares (exponent, constant) for ys ~ constant * xs**exponent."""
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope), float(math.exp(intercept))


def fit_line(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    slope, intercept = np.polyfit(np.asarray(xs, float), np.asarray(ys, float), 1)
    return float(slope), float(intercept)


# -- runs -----------------------------------------------------------------


@dataclass
class RunReport:
    scenario: Scenario
    seed: int
    verdicts: List[Verdict]
    metrics: Metrics
    trace: Optional[Trace] = None

    @property
    def passed(self) -> bool:
        return all(self.verdicts)


def run_scenario(s: Scenario, keep_trace: bool = True) -> RunReport:
    trace = simulate(s)
    verdicts = check_all(trace, s.q, s.max_epochs, s.check_termination)
    return RunReport(s, s.seed, verdicts, measure(trace, s.payload_bits), trace if keep_trace else None)


@dataclass(frozen=True)
class SweepRow:
    n: int
    f: int
    seed: int
    metrics: Metrics
    verdicts: Tuple[Verdict, ...]


def sweep(template: Scenario, n_list: Iterable[int], seeds: Iterable[int]) -> List[SweepRow]:
    seeds = list(seeds)
    rows = []
    for n in n_list:
        sized = template.with_size(n)
        for seed in seeds:
            report = run_scenario(sized.with_seed(seed), keep_trace=False)
            rows.append(SweepRow(n, sized.f, seed, report.metrics, tuple(report.verdicts)))
    return rows
