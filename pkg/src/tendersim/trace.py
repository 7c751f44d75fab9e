"""Ordered event log produced by a simulation, plus its line-oriented text encoding."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, Optional, Tuple

from .core import Message, Value

SEND, DELIVER, TIMER, EFFECT = "send", "deliver", "timer", "effect"


@dataclass(slots=True)
class TraceRecord:
    time: int
    kind: str
    src: Optional[int] = None
    dst: Optional[int] = None
    msg: Optional[Message] = None
    signer: Optional[int] = None
    sent_at: Optional[int] = None
    effect: Optional[str] = None  # "enter" or "decide" for EFFECT records
    round: Optional[str] = None
    epoch: Optional[int] = None
    value: Optional[Value] = None
    digest: Optional[Dict[str, Any]] = None


@dataclass
class Trace:
    variant: str
    n: int
    f: int
    byzantine: Tuple[int, ...]
    height: int = 0
    horizon: int = 0
    records: List[TraceRecord] = field(default_factory=list)
    terminated: bool = False
    end_time: int = 0
    store_peaks: Dict[int, int] = field(default_factory=dict)

    @property
    def correct(self) -> List[int]:
        return [i for i in range(self.n) if i not in self.byzantine]

    def of_kind(self, kind: str) -> Iterator[TraceRecord]:
        return (r for r in self.records if r.kind == kind)

    def decisions(self) -> List[TraceRecord]:
        return [r for r in self.records if r.kind == EFFECT and r.effect == "decide"]

    def epoch_ends(self) -> List[TraceRecord]:
        """Effect records carrying the validator state at the end of an epoch."""
        return [r for r in self.records if r.kind == EFFECT and r.digest is not None]

    def dumps(self) -> str:
        lines = [
            _kv(
                kind="header",
                variant=self.variant,
                n=self.n,
                f=self.f,
                byzantine=",".join(map(str, self.byzantine)) or "-",
                height=self.height,
                horizon=self.horizon,
            )
        ]
        lines.extend(_record_line(r) for r in self.records)
        lines.append(
            _kv(
                kind="footer",
                terminated=str(self.terminated).lower(),
                end_time=self.end_time,
                store_peaks=",".join(f"{k}:{v}" for k, v in sorted(self.store_peaks.items())) or "-",
            )
        )
        return "\n".join(lines) + "\n"


def _fmt(v: Any) -> str:
    if v is None:
        return "nil"
    if isinstance(v, Value):
        return f"{v.id}:{v.payload_bits}:{int(v.valid)}"
    if isinstance(v, Message):
        return v.summary()
    return str(v)


def _kv(**fields: Any) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in fields.items())


def _record_line(r: TraceRecord) -> str:
    fields: Dict[str, Any] = {"t": r.time, "kind": r.kind}
    if r.kind in (SEND, DELIVER):
        fields.update({"from": r.src, "to": r.dst, "signer": r.signer, "sent": r.sent_at, "msg": r.msg})
    elif r.kind == TIMER:
        fields.update({"to": r.dst, "round": r.round, "epoch": r.epoch})
    else:
        fields.update({"v": r.src, "effect": r.effect, "round": r.round, "epoch": r.epoch, "value": r.value})
        if r.digest is not None:
            for k in sorted(r.digest):
                fields[f"d.{k}"] = r.digest[k]
    return _kv(**fields)
