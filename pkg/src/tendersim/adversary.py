"""Scripted Byzantine behaviours.

Byzantine validators own no engine state. A script reacts to what correct
validators do (it sees every effect) by unicasting messages signed with a
Byzantine identity, and may choose delivery delays for any message sent
before the stabilization time.
"""

from __future__ import annotations

from typing import Dict, Iterable, Optional, Sequence, Set, Tuple

from .core import NEVER, Message, QuorumParams, Round, Tag, Value
from .effects import Broadcast, EnterRound

FOREVER = 1 << 60  # requested delay that the network clamps to tau + delta


class Adversary:
    """Base script; with no Byzantine ids (or all silent) it does nothing."""

    name = "none"

    def __init__(self, byzantine: Iterable[int] = ()):
        self.byzantine = frozenset(byzantine)
        self._seen: Set[Tuple[Round, int]] = set()

    def attach(self, sim) -> None:
        self._seen = set()

    def observe(self, sim, validator: int, effect) -> None:
        if isinstance(effect, EnterRound):
            key = (effect.round, effect.epoch)
            if key not in self._seen:
                self._seen.add(key)
                self.on_round(sim, effect.round, effect.epoch)
        elif isinstance(effect, Broadcast) and effect.signer == validator:
            if effect.msg.tag is Tag.PRE_PROPOSE:
                self.on_pre_proposal(sim, validator, effect.msg)

    def on_round(self, sim, rnd: Round, e: int) -> None:
        """Called when the first correct validator enters ``rnd`` of epoch ``e``."""

    def on_pre_proposal(self, sim, validator: int, msg: Message) -> None:
        pass

    def on_deliver(self, sim, byz: int, msg: Message, signer: int) -> None:
        pass

    def delay(self, sim, src: int, dst: int, msg: Message, signer: int) -> Optional[int]:
        """Absolute delivery time wanted for a message, or None for the default."""
        return None

    def describe(self) -> Dict[str, object]:
        return {"name": self.name, "byzantine": sorted(self.byzantine)}


class Silent(Adversary):
    name = "silent"


def silent(ids: Iterable[int]) -> Adversary:
    return Silent(ids)


def _pre_propose(sim, e: int, v: Value) -> Message:
    ve = NEVER if sim.trace.variant == "es" else None
    return Message.pre_propose(sim.height, e, v, ve)


class EquivocatingProposer(Adversary):
    """Byzantine proposers pre-propose ``v1`` to one side and ``v2`` to the other.

    With ``collude`` the Byzantine validators also propose and vote ``v1``
    towards the first side and ``v2`` towards the second, every epoch.
    """

    name = "equivocating"

    def __init__(
        self,
        byzantine: Iterable[int],
        v1: Value,
        v2: Value,
        partition: Tuple[Iterable[int], Iterable[int]],
        collude: bool = False,
    ):
        super().__init__(byzantine)
        side_a, side_b = (frozenset(s) for s in partition)
        if side_a & side_b:
            raise ValueError(f"partition sides overlap on {sorted(side_a & side_b)}")
        self.v1, self.v2 = v1, v2
        self.side_a, self.side_b = side_a, side_b
        self.collude = collude

    def _split(self, sim, src: int, make) -> None:
        for dst in sorted(self.side_a):
            sim.unicast(src, dst, make(self.v1))
        for dst in sorted(self.side_b):
            sim.unicast(src, dst, make(self.v2))

    def on_round(self, sim, rnd: Round, e: int) -> None:
        h = sim.height
        if rnd is Round.PRE_PROPOSE:
            p = sim.proposer_of(e)
            if p in self.byzantine:
                self._split(sim, p, lambda v: _pre_propose(sim, e, v))
        elif self.collude:
            make = (lambda v: Message.propose(h, e, v)) if rnd is Round.PROPOSE else (lambda v: Message.vote(h, e, v))
            for b in sorted(self.byzantine):
                self._split(sim, b, make)

    def describe(self) -> Dict[str, object]:
        return {
            **super().describe(),
            "v1": self.v1.id,
            "v2": self.v2.id,
            "side_a": sorted(self.side_a),
            "side_b": sorted(self.side_b),
            "collude": self.collude,
        }


def equivocating_proposer(byzantine, v1: Value, v2: Value, partition, collude: bool = False) -> Adversary:
    return EquivocatingProposer(byzantine, v1, v2, partition, collude)


class SplitLocker(Adversary):
    """Push exactly ``targets`` past the 2f+1 proposal threshold in ``epochs``.

    When a Byzantine validator is the proposer it pre-proposes a fresh value
    to the targets plus enough helpers to make f+1 correct proposers; when
    the proposer is correct its pre-proposal is reused. Either way every
    Byzantine validator then sends PROPOSE for that value to the targets only.
    """

    name = "split_locker"

    def __init__(
        self,
        byzantine: Iterable[int],
        q: QuorumParams,
        targets: Iterable[int],
        epochs: Iterable[int],
        helpers: Optional[Iterable[int]] = None,
        values: Optional[Dict[int, Value]] = None,
    ):
        super().__init__(byzantine)
        self.q = q
        self.targets = tuple(sorted(set(targets)))
        if set(self.targets) & self.byzantine:
            raise ValueError("targets must be correct validators")
        self.epochs = frozenset(epochs)
        self.helpers = tuple(sorted(set(helpers))) if helpers is not None else None
        self.values: Dict[int, Value] = dict(values or {})

    def _helpers(self, sim) -> Tuple[int, ...]:
        if self.helpers is not None:
            return self.helpers
        spare = [v for v in sim.correct if v not in self.targets]
        need = max(0, self.q.f + 1 - len(self.targets))
        return tuple(spare[:need])

    def on_round(self, sim, rnd: Round, e: int) -> None:
        if e not in self.epochs:
            return
        if rnd is Round.PRE_PROPOSE:
            p = sim.proposer_of(e)
            if p in self.byzantine:
                v = self.values.setdefault(e, Value(f"x{e}"))
                for dst in sorted(set(self.targets) | set(self._helpers(sim))):
                    sim.unicast(p, dst, _pre_propose(sim, e, v))
        elif rnd is Round.PROPOSE:
            v = self.values.get(e)
            if v is None:
                return
            for b in sorted(self.byzantine):
                for t in self.targets:
                    sim.unicast(b, t, Message.propose(sim.height, e, v))

    def on_pre_proposal(self, sim, validator: int, msg: Message) -> None:
        if msg.epoch in self.epochs and validator == sim.proposer_of(msg.epoch):
            self.values.setdefault(msg.epoch, msg.value)

    def describe(self) -> Dict[str, object]:
        return {**super().describe(), "targets": list(self.targets), "epochs": sorted(self.epochs)}


def split_locker(byzantine, q: QuorumParams, targets, epochs, helpers=None, values=None) -> Adversary:
    return SplitLocker(byzantine, q, targets, epochs, helpers, values)


class WorstCase(SplitLocker):
    """Long run to decision after stabilization.

    Validators are laid out so the round-robin order is: f correct targets,
    then the f Byzantine validators, then f+1 unlocked correct validators.
    Before GST, epoch k (k < f) is proposed by target k; its pre-proposal
    reaches only f helpers promptly, and the Byzantine validators send their
    PROPOSE to the target alone, so each target locks on its own value in a
    different epoch. The target's relays of those Byzantine proposals are held
    until GST so no one else can adopt the lock as its valid value. After GST
    the Byzantine proposers stay silent, the unlocked proposers' fresh values
    and the lower targets' values are refused by some locked validator, and
    the first decision comes when the highest-locked target proposes again.
    """

    name = "worst_case"

    def __init__(self, q: QuorumParams):
        f = q.f
        self.target_ids = tuple(range(f))
        byzantine = range(f, 2 * f)
        helpers = tuple(range(2 * f, 3 * f))
        super().__init__(byzantine, q, self.target_ids, range(f), helpers)

    @property
    def decision_epoch(self) -> int:
        """Epoch in which the highest-locked target proposes again."""
        return 0 if self.q.f == 0 else self.q.n + self.q.f - 1

    def on_round(self, sim, rnd: Round, e: int) -> None:
        if rnd is Round.PROPOSE and e in self.epochs and e in self.values:
            target = sim.proposer_of(e)
            for b in sorted(self.byzantine):
                sim.unicast(b, target, Message.propose(sim.height, e, self.values[e]))

    def suggested_tau(self, timeouts: Sequence[int], delta: int) -> int:
        """A stabilization time after the locking epochs' held messages are sent."""
        return self.q.f * (sum(timeouts) + 3 * delta) + delta

    def delay(self, sim, src: int, dst: int, msg: Message, signer: int) -> Optional[int]:
        e = msg.epoch
        if e in self.epochs and src == sim.proposer_of(e):
            if msg.tag is Tag.PRE_PROPOSE and dst not in self.helpers:
                return FOREVER
            if msg.tag is Tag.PROPOSE and signer in self.byzantine:
                return FOREVER
        return sim.now + sim.config.delta

    def describe(self) -> Dict[str, object]:
        return {"name": self.name, "byzantine": sorted(self.byzantine), "targets": list(self.target_ids)}


def worst_case_orchestrator(q: QuorumParams) -> WorstCase:
    return WorstCase(q)
