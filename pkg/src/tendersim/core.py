"""Shared vocabulary: quorum arithmetic, values, messages, proposer rotation."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Optional, Sequence

NEVER = -1  # sentinel epoch for lockedEpoch / validEpoch before any update


class Tag(enum.Enum):
    PRE_PROPOSE = "PRE-PROPOSE"
    PROPOSE = "PROPOSE"
    VOTE = "VOTE"
    HEARTBEAT = "HEARTBEAT"

    def __str__(self) -> str:
        return self.value


class Round(enum.Enum):
    PRE_PROPOSE = "PRE-PROPOSE"
    PROPOSE = "PROPOSE"
    VOTE = "VOTE"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class QuorumParams:
    n: int
    f: int

    def __post_init__(self) -> None:
        if self.n < 1 or self.f < 0:
            raise ValueError(f"invalid quorum parameters n={self.n} f={self.f}")
        if self.n < 3 * self.f + 1:
            raise ValueError(f"n={self.n} must be at least 3f+1={3 * self.f + 1}")

    @classmethod
    def for_faults(cls, f: int) -> "QuorumParams":
        return cls(3 * f + 1, f)


def quorum_threshold(q: QuorumParams) -> int:
    return 2 * q.f + 1


@dataclass(frozen=True, slots=True)
class Value:
    """An opaque proposable value. ``None`` plays the role of nil."""

    id: str
    payload_bits: int = 64
    valid: bool = True

    def __str__(self) -> str:
        return self.id if self.valid else f"{self.id}!"


def is_valid(v: Optional[Value]) -> bool:
    return v is not None and v.valid


def proposer(h: int, e: int, validators: Sequence[int]) -> int:
    """Round-robin proposer for height ``h`` and epoch ``e``."""
    if not validators:
        raise ValueError("empty validator set")
    if e < 0:
        raise ValueError(f"epoch must be non-negative, got {e}")
    return validators[(h + e) % len(validators)]


class ValueGenerator:
    """Deterministic source of fresh valid values for one validator.

    Values are unique per (seed, validator, call index); the payload
    size is fixed per scenario.
    """

    def __init__(self, validator: int, seed: int = 0, payload_bits: int = 64):
        self.validator = validator
        self.seed = seed
        self.payload_bits = payload_bits
        self._rng = random.Random(f"{seed}:{validator}")
        self._calls = 0

    def __call__(self) -> Value:
        tag = self._rng.getrandbits(24)
        v = Value(f"v{self.validator}.{self._calls}.{tag:06x}", self.payload_bits)
        self._calls += 1
        return v


def get_value(source: ValueGenerator) -> Value:
    return source()


@dataclass(frozen=True, slots=True)
class Message:
    tag: Tag
    height: int
    epoch: int
    value: Optional[Value] = None
    valid_epoch: Optional[int] = None
    hb_round: Optional[Tag] = None

    def __post_init__(self) -> None:
        if self.height < 0 or self.epoch < 0:
            raise ValueError(f"bad height/epoch in {self!r}")
        if self.tag is Tag.HEARTBEAT:
            if self.value is not None or self.valid_epoch is not None:
                raise ValueError("heartbeat carries no value")
            if self.hb_round not in (Tag.PROPOSE, Tag.VOTE):
                raise ValueError("heartbeat needs hb_round PROPOSE or VOTE")
            return
        if self.hb_round is not None:
            raise ValueError(f"{self.tag} carries no hb_round")
        if self.value is None:
            raise ValueError(f"{self.tag} must carry a value")
        if self.valid_epoch is not None:
            if self.tag is not Tag.PRE_PROPOSE:
                raise ValueError("only pre-proposals carry valid_epoch")
            if self.valid_epoch < NEVER:
                raise ValueError(f"bad valid_epoch {self.valid_epoch}")

    @classmethod
    def pre_propose(cls, h: int, e: int, v: Value, valid_epoch: Optional[int] = None) -> "Message":
        return cls(Tag.PRE_PROPOSE, h, e, v, valid_epoch)

    @classmethod
    def propose(cls, h: int, e: int, v: Value) -> "Message":
        return cls(Tag.PROPOSE, h, e, v)

    @classmethod
    def vote(cls, h: int, e: int, v: Value) -> "Message":
        return cls(Tag.VOTE, h, e, v)

    @classmethod
    def heartbeat(cls, hb_round: Tag, h: int, e: int) -> "Message":
        return cls(Tag.HEARTBEAT, h, e, hb_round=hb_round)

    def summary(self) -> str:
        parts = [str(self.tag), f"h{self.height}", f"e{self.epoch}"]
        if self.tag is Tag.HEARTBEAT:
            parts.append(str(self.hb_round))
        else:
            parts.append(str(self.value))
        if self.valid_epoch is not None:
            parts.append(f"ve{self.valid_epoch}")
        return "/".join(parts)
