"""Validator state machine for the synchronous variant.

Every epoch runs PRE-PROPOSE, PROPOSE and VOTE rounds of fixed length
``delta``. Send and Compute are atomic; the Delivery phase is the interval
between ``start_round`` and the round timer firing ``end_round``.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence

from .core import (
    NEVER,
    Message,
    QuorumParams,
    Round,
    Tag,
    Value,
    ValueGenerator,
    is_valid,
    proposer,
)
from .effects import Broadcast, Decide, Effect, EnterRound, SetTimer
from .msgstore import MessageStore


class SyncEngine:
    variant = "sync"

    def __init__(
        self,
        id: int,
        q: QuorumParams,
        validators: Optional[Sequence[int]] = None,
        height: int = 0,
        delta: int = 10,
        values: Optional[ValueGenerator] = None,
    ):
        self.id = id
        self.q = q
        self.validators = list(validators) if validators is not None else list(range(q.n))
        if id not in self.validators:
            raise ValueError(f"validator {id} not in validator set")
        self.h = height
        self.delta = delta
        self.values = values or ValueGenerator(id)
        self.store = MessageStore()

        self.e = 0
        self.round = Round.PRE_PROPOSE
        self.decision: Optional[Value] = None
        self.decision_epoch: Optional[int] = None  # e_d of the quorum that decided
        self.locked_value: Optional[Value] = None
        self.valid_value: Optional[Value] = None
        # The synchronous algorithm keeps no epoch stamps; this one is recorded
        # only so that lock-safety can be checked on traces of both variants.
        self.locked_epoch = NEVER
        self.proposal: Optional[Value] = self.values()
        self.v_pre: Optional[Value] = None
        self.vote: Optional[Value] = None

        self.token = 0  # identifies the live round timer
        self.active = False  # Delivery phase in progress
        self.halted = False

    # -- driver interface -------------------------------------------------

    def start(self) -> List[Effect]:
        return self._settle(self._enter(Round.PRE_PROPOSE, 0))

    def receive(self, msg: Message, sender: int) -> None:
        """Store a delivered message and capture the proposer's pre-proposal."""
        if not self.store.insert(msg, sender):
            return
        if (
            self.active
            and self.round is Round.PRE_PROPOSE
            and msg.tag is Tag.PRE_PROPOSE
            and msg.height == self.h
            and msg.epoch == self.e
            and sender == self.proposer_of(self.e)
        ):
            self._capture(msg)

    def on_deliver(self, msg: Message, sender: int) -> List[Effect]:
        self.receive(msg, sender)
        return self.poll()

    def poll(self) -> List[Effect]:
        return []

    def on_timer(self, token: int) -> List[Effect]:
        if token != self.token or self.halted:
            return []
        if not self.active:
            # zero-length pause after deciding: run the next Send phase
            return self.start_round()
        return self._settle(self.end_round())

    # -- rounds -----------------------------------------------------------

    def start_round(self) -> List[Effect]:
        """Send phase of the current round; arms the round timer."""
        out: List[Effect] = []
        h, e = self.h, self.e
        if self.round is Round.PRE_PROPOSE:
            if self.decision is not None:
                out.extend(self._relay(Tag.VOTE, self.decision_epoch))
                self.halted = True
                self.active = False
                return out
            if self.proposer_of(e) == self.id:
                out.append(self._send(self._pre_proposal()))
            pre = self.store.get(Tag.PRE_PROPOSE, h, e, self.proposer_of(e))
            if pre is not None:
                self._capture(pre)
        elif self.round is Round.PROPOSE:
            if self.proposal is not None:
                out.append(self._send(Message.propose(h, e, self.proposal)))
            out.extend(self._heartbeat(Tag.PROPOSE))
        else:
            out.extend(self._relay(Tag.PROPOSE, e))
            if self.vote is not None:
                out.append(self._send(Message.vote(h, e, self.vote)))
            out.extend(self._heartbeat(Tag.VOTE))
        self.active = True
        out.append(SetTimer(self.round_duration(), self.token))
        return out

    def end_round(self) -> List[Effect]:
        """Compute phase of the current round, then entry into the next one."""
        self.active = False
        if self.round is Round.PRE_PROPOSE:
            v = self.v_pre
            if not is_valid(v):
                self.proposal = None
            elif self.valid_value is None or v in (self.locked_value, self.valid_value):
                self.proposal = v
            else:
                self.proposal = None
            return self._enter(Round.PROPOSE, self.e)
        if self.round is Round.PROPOSE:
            v = self.proposed_quorum()
            if v is not None:
                self.locked_value = self.valid_value = self.vote = v
                self.locked_epoch = self.e
            else:
                self.vote = None
            return self._enter(Round.VOTE, self.e)
        v = self.proposed_quorum()
        if v is not None:
            self.valid_value = v
        return self._decide_or_advance()

    # -- helpers ----------------------------------------------------------

    def proposer_of(self, e: int) -> int:
        return proposer(self.h, e, self.validators)

    def round_duration(self) -> int:
        return self.delta

    def pre_proposed_value(self) -> Optional[Value]:
        """Value this validator delivered from the proposer of the current epoch."""
        pre = self.store.get(Tag.PRE_PROPOSE, self.h, self.e, self.proposer_of(self.e))
        return pre.value if pre is not None else None

    def proposed_quorum(self) -> Optional[Value]:
        """Valid pre-proposed value backed by 2f+1 proposals this epoch."""
        pre = self.pre_proposed_value()
        if not is_valid(pre):
            return None
        return self.store.quorum_value(Tag.PROPOSE, self.h, self.e, self.q, pre)

    def _decide_or_advance(self) -> List[Effect]:
        found = self.store.precommit_quorum_any_epoch(self.h, self.q)
        if found is not None and self.decision is None:
            self.decision_epoch, self.decision = found
            self.token += 1
            self.round = Round.PRE_PROPOSE
            return [Decide(self.decision, self.e, self.digest()), SetTimer(0, self.token)]
        return self._new_epoch(self.e + 1)

    def _new_epoch(self, e: int) -> List[Effect]:
        self.v_pre = None
        self.proposal = self.valid_value if self.valid_value is not None else self.values()
        return self._enter(Round.PRE_PROPOSE, e)

    def _enter(self, rnd: Round, e: int) -> List[Effect]:
        snapshot = self.digest() if e != self.e else None
        self.round = rnd
        self.e = e
        self.token += 1
        return [EnterRound(rnd, e, snapshot)] + self.start_round()

    def _settle(self, effects: List[Effect]) -> List[Effect]:
        return effects + self.poll()

    def _capture(self, pre: Message) -> None:
        self.v_pre = pre.value

    def _pre_proposal(self) -> Message:
        return Message.pre_propose(self.h, self.e, self.proposal)

    def _heartbeat(self, hb_round: Tag) -> List[Effect]:
        return []

    def _send(self, msg: Message) -> Broadcast:
        self.store.insert(msg, self.id)
        return Broadcast(msg, self.id)

    def _relay(self, tag: Tag, e: int) -> List[Effect]:
        return [Broadcast(m, s) for m, s in self.store.messages_of(tag, self.h, e)]

    def digest(self) -> Dict[str, object]:
        return {
            "epoch": self.e,
            "locked": self.locked_value,
            "locked_epoch": self.locked_epoch,
            "valid": self.valid_value,
            "valid_epoch": getattr(self, "valid_epoch", NEVER),
            "decision": self.decision,
        }
