"""Per-validator deduplicated message set with the quorum queries both engines use.

Only the first message per (tag, height, epoch, sender) is kept; heartbeats
are additionally keyed by the round they signal, so a sender contributes at
most one PROPOSE heartbeat and one VOTE heartbeat per epoch.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from typing import Dict, List, Optional, Tuple

from .core import Message, QuorumParams, Tag, Value, is_valid, quorum_threshold

# (tag, height, epoch, hb_round) -> {sender: message}
Slot = Tuple[Tag, int, int, Optional[Tag]]


class MessageStore:
    def __init__(self) -> None:
        self._slots: Dict[Slot, Dict[int, Message]] = {}
        self._epochs: Dict[int, set] = defaultdict(set)
        self._count: Counter = Counter()  # (h, e) -> stored messages
        self.peak = 0  # max stored messages for any single (h, e)

    def __len__(self) -> int:
        return sum(self._count.values())

    def count_at(self, h: int, e: int) -> int:
        return self._count[(h, e)]

    def insert(self, msg: Message, sender: int) -> bool:
        slot = (msg.tag, msg.height, msg.epoch, msg.hb_round)
        senders = self._slots.get(slot)
        if senders is None:
            senders = self._slots[slot] = {}
        elif sender in senders:
            return False
        senders[sender] = msg
        self._epochs[msg.height].add(msg.epoch)
        key = (msg.height, msg.epoch)
        self._count[key] += 1
        if self._count[key] > self.peak:
            self.peak = self._count[key]
        return True

    def get(self, tag: Tag, h: int, e: int, sender: int, hb_round: Optional[Tag] = None) -> Optional[Message]:
        return self._slots.get((tag, h, e, hb_round), {}).get(sender)

    def _senders(self, tag: Tag, h: int, e: int, hb_round: Optional[Tag] = None) -> Dict[int, Message]:
        return self._slots.get((tag, h, e, hb_round), {})

    def quorum_value(
        self,
        tag: Tag,
        h: int,
        e: int,
        q: QuorumParams,
        proposer_value_filter: Optional[Value] = None,
    ) -> Optional[Value]:
        """Value with at least 2f+1 distinct-sender ``tag`` messages at (h, e)."""
        if tag not in (Tag.PROPOSE, Tag.VOTE):
            raise ValueError(f"quorum_value is defined for PROPOSE/VOTE, not {tag}")
        counts = Counter(m.value for m in self._senders(tag, h, e).values())
        need = quorum_threshold(q)
        if proposer_value_filter is not None:
            return proposer_value_filter if counts[proposer_value_filter] >= need else None
        for v, c in counts.items():
            if c >= need:
                return v
        return None

    def precommit_quorum_any_epoch(self, h: int, q: QuorumParams) -> Optional[Tuple[int, Value]]:
        """Lowest epoch holding 2f+1 votes for a single valid value, with that value."""
        need = quorum_threshold(q)
        for e in sorted(self._epochs.get(h, ())):
            counts = Counter(m.value for m in self._senders(Tag.VOTE, h, e).values())
            for v, c in counts.items():
                if c >= need and is_valid(v):
                    return e, v
        return None

    def heartbeat_quorum(self, hb_round: Tag, h: int, e: int, q: QuorumParams) -> bool:
        if hb_round not in (Tag.PROPOSE, Tag.VOTE):
            raise ValueError(f"no heartbeat for round {hb_round}")
        live = self._senders(Tag.HEARTBEAT, h, e, hb_round).keys() | self._senders(hb_round, h, e).keys()
        return len(live) >= quorum_threshold(q)

    def jump_target(self, h: int, current_e: int, q: QuorumParams) -> Optional[int]:
        """Highest epoch above ``current_e`` where one message type has f+1 senders."""
        need = q.f + 1
        for e in sorted((x for x in self._epochs.get(h, ()) if x > current_e), reverse=True):
            for tag in (Tag.PRE_PROPOSE, Tag.PROPOSE, Tag.VOTE):
                if len(self._senders(tag, h, e)) >= need:
                    return e
            hb = self._senders(Tag.HEARTBEAT, h, e, Tag.PROPOSE).keys() | self._senders(
                Tag.HEARTBEAT, h, e, Tag.VOTE
            ).keys()
            if len(hb) >= need:
                return e
        return None

    def messages_of(self, tag: Tag, h: int, e: int) -> List[Tuple[Message, int]]:
        if tag is Tag.HEARTBEAT:
            entries = [
                (m, s)
                for r in (Tag.PROPOSE, Tag.VOTE)
                for s, m in self._senders(Tag.HEARTBEAT, h, e, r).items()
            ]
            return sorted(entries, key=lambda ms: (ms[1], str(ms[0].hb_round)))
        return sorted(((m, s) for s, m in self._senders(tag, h, e).items()), key=lambda ms: ms[1])

    def drop_height(self, h: int) -> None:
        for slot in [s for s in self._slots if s[1] == h]:
            del self._slots[slot]
        for key in [k for k in self._count if k[0] == h]:
            del self._count[key]
        self._epochs.pop(h, None)
