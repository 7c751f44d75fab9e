"""Validator state machine for the eventually-synchronous variant.

Differences from the synchronous engine: locks and valid values carry the
epoch they were set in, pre-proposals carry the proposer's validEpoch, round
lengths are per-round timeouts that grow by one step whenever the round ends
without what it waited for, PROPOSE and VOTE rounds end early on 2f+1
heartbeats, and f+1 same-type messages from a higher epoch make the
validator jump straight to that epoch.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence

from .core import NEVER, Message, QuorumParams, Round, Tag, ValueGenerator, is_valid
from .effects import Effect
from .sync_engine import SyncEngine


class EsEngine(SyncEngine):
    variant = "es"

    def __init__(
        self,
        id: int,
        q: QuorumParams,
        validators: Optional[Sequence[int]] = None,
        height: int = 0,
        timeouts: Sequence[int] = (30, 30, 30),
        timeout_step: int = 1,
        values: Optional[ValueGenerator] = None,
    ):
        super().__init__(id, q, validators, height, values=values)
        self.valid_epoch = NEVER
        self.ve_pre: Optional[int] = None
        pre, prop, vote = timeouts
        self.timeouts: Dict[Round, int] = {
            Round.PRE_PROPOSE: pre,
            Round.PROPOSE: prop,
            Round.VOTE: vote,
        }
        self.timeout_step = timeout_step

    @property
    def timeout_propose(self) -> int:
        return self.timeouts[Round.PRE_PROPOSE]

    @property
    def timeout_prevote(self) -> int:
        return self.timeouts[Round.PROPOSE]

    @property
    def timeout_precommit(self) -> int:
        return self.timeouts[Round.VOTE]

    def round_duration(self) -> int:
        return self.timeouts[self.round]

    def poll(self) -> List[Effect]:
        """Apply jump-ahead and early round exits until the state is stable."""
        out: List[Effect] = []
        while self.active and not self.halted:
            target = self.store.jump_target(self.h, self.e, self.q)
            if target is not None:
                self.active = False
                out.extend(self._new_epoch(target))
            elif self._delivery_over():
                out.extend(self.end_round())
            else:
                break
        return out

    def _delivery_over(self) -> bool:
        if self.round is Round.PRE_PROPOSE:
            return self.v_pre is not None
        return self.store.heartbeat_quorum(_HB[self.round], self.h, self.e, self.q)

    def end_round(self) -> List[Effect]:
        self.active = False
        h, e = self.h, self.e
        if self.round is Round.PRE_PROPOSE:
            v = self.v_pre
            if v is None:
                self.timeouts[Round.PRE_PROPOSE] += self.timeout_step
            ve = self.ve_pre if self.ve_pre is not None else NEVER
            if (
                is_valid(v)
                and self.locked_epoch <= ve < e
                and self.store.quorum_value(Tag.PROPOSE, h, ve, self.q, v) is not None
            ):
                self.proposal = v
            elif not is_valid(v) or (self.locked_epoch > ve and self.locked_value != v):
                self.proposal = None
            elif self.locked_epoch == NEVER or self.locked_value == v:
                self.proposal = v
            else:
                # the pseudo-code leaves proposal untouched here; never carry
                # the previous epoch's value into this one
                self.proposal = None
            return self._enter(Round.PROPOSE, e)

        quorum_heard = self.store.heartbeat_quorum(_HB[self.round], h, e, self.q)
        if not quorum_heard:
            self.timeouts[self.round] += self.timeout_step
        v = self.proposed_quorum()
        if self.round is Round.PROPOSE:
            if v is not None:
                self.locked_value = self.valid_value = self.vote = v
                self.locked_epoch = self.valid_epoch = e
            else:
                self.vote = None
            return self._enter(Round.VOTE, e)
        if v is not None:
            self.valid_value = v
            self.valid_epoch = e
        return self._decide_or_advance()

    def _new_epoch(self, e: int) -> List[Effect]:
        self.ve_pre = None
        return super()._new_epoch(e)

    def _capture(self, pre: Message) -> None:
        self.v_pre = pre.value
        self.ve_pre = pre.valid_epoch

    def _pre_proposal(self) -> Message:
        return Message.pre_propose(self.h, self.e, self.proposal, self.valid_epoch)

    def _heartbeat(self, hb_round: Tag) -> List[Effect]:
        return [self._send(Message.heartbeat(hb_round, self.h, self.e))]


_HB = {Round.PROPOSE: Tag.PROPOSE, Round.VOTE: Tag.VOTE}
