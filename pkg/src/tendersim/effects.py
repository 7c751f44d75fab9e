"""Engine outputs. Engines never touch the network; the simulator applies these."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional, Union

from .core import Message, Round, Value


@dataclass(frozen=True, slots=True)
class Broadcast:
    msg: Message
    signer: int  # original author; differs from the sender for relays


@dataclass(frozen=True, slots=True)
class Decide:
    value: Value
    epoch: int
    snapshot: Optional[Dict[str, Any]] = None


@dataclass(frozen=True, slots=True)
class EnterRound:
    round: Round
    epoch: int
    snapshot: Optional[Dict[str, Any]] = None  # state at the end of the epoch being left


@dataclass(frozen=True, slots=True)
class SetTimer:
    duration: int
    token: int


Effect = Union[Broadcast, Decide, EnterRound, SetTimer]
