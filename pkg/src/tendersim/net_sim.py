"""Discrete-event network with eventual synchrony.

One global virtual clock (integer ticks). Messages sent at or after the
stabilization time ``tau`` arrive within ``delta``; messages sent before it
take an arbitrary delay, clamped so that they arrive by ``tau + delta`` at
the latest. Nothing is ever dropped.

Events are ordered by (time, kind, recipient, sequence number) with
deliveries before round timers, and round timers before zero-length timers,
at equal times. A message that takes exactly the maximum delay therefore
still lands inside the round that was waiting for it, and a Send phase
scheduled "immediately" runs after every Compute phase of that instant. All
deliveries for one recipient at one instant are handed to its engine as a
batch before the engine evaluates early exits.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import List, Mapping, Optional, Sequence

from .core import Message, QuorumParams, proposer
from .effects import Broadcast, Decide, Effect, EnterRound, SetTimer
from .trace import DELIVER, EFFECT, SEND, TIMER, Trace, TraceRecord

_DELIVER, _TIMER, _DEFERRED = 0, 1, 2


@dataclass(frozen=True)
class NetworkConfig:
    delta: int = 10
    tau: int = 0
    pre_gst: str = "uniform"  # "uniform" in [1, pre_gst_max], or "adversarial"
    pre_gst_max: int = 50
    post_gst: str = "fixed"  # "fixed" = exactly delta, "uniform" in [1, delta]
    seed: int = 0

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        if self.pre_gst not in ("uniform", "adversarial"):
            raise ValueError(f"unknown pre_gst model {self.pre_gst!r}")
        if self.post_gst not in ("fixed", "uniform"):
            raise ValueError(f"unknown post_gst model {self.post_gst!r}")
        if self.pre_gst_max < 1:
            raise ValueError("pre_gst_max must be at least 1")


@dataclass(frozen=True, slots=True)
class InFlightMessage:
    msg: Message
    src: int
    dst: int
    signer: int
    sent_at: int
    deliver_at: int


class Network:
    """Point-to-point links with per-message delivery times."""

    def __init__(self, config: NetworkConfig, n: int):
        self.config = config
        self.n = n
        self.rng = random.Random(f"net:{config.seed}")

    def delivery_time(self, now: int, override: Optional[int] = None) -> int:
        cfg = self.config
        if now >= cfg.tau:
            if override is not None:
                return min(max(override, now + 1), now + cfg.delta)
            if cfg.post_gst == "fixed":
                return now + cfg.delta
            return now + self.rng.randint(1, cfg.delta)
        if override is not None and cfg.pre_gst == "adversarial":
            at = max(override, now + 1)
        else:
            at = now + self.rng.randint(1, cfg.pre_gst_max)
        return min(at, cfg.tau + cfg.delta)


class Simulation:
    """Drives correct engines and an adversary over a simulated network.

    The adversary sees every effect of every correct engine (it is
    omniscient) and may unicast messages signed by Byzantine validators.
    """

    def __init__(
        self,
        engines: Mapping[int, object],
        q: QuorumParams,
        config: NetworkConfig,
        adversary=None,
        horizon: int = 10_000,
        height: int = 0,
        validators: Optional[Sequence[int]] = None,
    ):
        from .adversary import Adversary

        self.q = q
        self.validators = list(validators) if validators is not None else list(range(q.n))
        self.engines = dict(engines)
        self.adversary = adversary if adversary is not None else Adversary()
        self.byzantine = frozenset(self.adversary.byzantine)
        if len(self.byzantine) > q.f:
            raise ValueError(f"{len(self.byzantine)} Byzantine validators exceed f={q.f}")
        missing = set(self.validators) - self.byzantine - set(self.engines)
        if missing:
            raise ValueError(f"no engine for correct validators {sorted(missing)}")
        self.config = config
        self.net = Network(config, len(self.validators))
        self.horizon = horizon
        self.height = height
        self.now = 0
        self._queue: List[tuple] = []
        self._seq = 0
        self._decided: set = set()
        variant = next(iter(self.engines.values())).variant if self.engines else "none"
        self.trace = Trace(variant, q.n, q.f, tuple(sorted(self.byzantine)), height, horizon)

    # -- adversary-facing API ---------------------------------------------

    @property
    def correct(self) -> List[int]:
        return [v for v in self.validators if v not in self.byzantine]

    def proposer_of(self, e: int) -> int:
        return proposer(self.height, e, self.validators)

    def broadcast(self, src: int, msg: Message, signer: Optional[int] = None) -> None:
        """One point-to-point message to every other validator (n-1 in total)."""
        if src not in self.validators:
            raise ValueError(f"unknown sender {src}")
        signer = src if signer is None else signer
        for dst in self.validators:
            if dst != src:
                self._send(src, dst, msg, signer)

    def unicast(self, src: int, dst: int, msg: Message) -> None:
        """Send a message signed by Byzantine validator ``src``."""
        if src not in self.byzantine:
            raise ValueError(f"validator {src} is not Byzantine and may only broadcast")
        if dst == src or dst in self.byzantine:
            return
        self._send(src, dst, msg, src)

    # -- event loop -------------------------------------------------------

    def _push(self, time: int, kind: int, dst: int, payload) -> None:
        heapq.heappush(self._queue, (time, kind, dst, self._seq, payload))
        self._seq += 1

    def _send(self, src: int, dst: int, msg: Message, signer: int) -> None:
        override = self.adversary.delay(self, src, dst, msg, signer)
        at = self.net.delivery_time(self.now, override)
        flight = InFlightMessage(msg, src, dst, signer, self.now, at)
        self.trace.records.append(TraceRecord(self.now, SEND, src, dst, msg, signer, self.now))
        self._push(at, _DELIVER, dst, flight)

    def _apply(self, v: int, effects: List[Effect]) -> None:
        for eff in effects:
            if isinstance(eff, Broadcast):
                self.broadcast(v, eff.msg, eff.signer)
            elif isinstance(eff, SetTimer):
                kind = _TIMER if eff.duration > 0 else _DEFERRED
                self._push(self.now + eff.duration, kind, v, eff.token)
            elif isinstance(eff, EnterRound):
                self.trace.records.append(
                    TraceRecord(
                        self.now, EFFECT, v, effect="enter", round=str(eff.round),
                        epoch=eff.epoch, digest=eff.snapshot,
                    )
                )
            elif isinstance(eff, Decide):
                self._decided.add(v)
                self.trace.records.append(
                    TraceRecord(
                        self.now, EFFECT, v, effect="decide", epoch=eff.epoch,
                        value=eff.value, digest=eff.snapshot,
                    )
                )
            self.adversary.observe(self, v, eff)

    def _all_decided(self) -> bool:
        return len(self._decided) == len(self.engines)

    def run(self) -> Trace:
        self.adversary.attach(self)
        for v in sorted(self.engines):
            self._apply(v, self.engines[v].start())
        terminated = self._all_decided()
        while self._queue and not terminated:
            time, kind, dst, _, payload = self._queue[0]
            if time > self.horizon:
                break
            heapq.heappop(self._queue)
            self.now = time
            if kind == _DELIVER:
                batch = [payload]
                while self._queue and self._queue[0][:3] == (time, _DELIVER, dst):
                    batch.append(heapq.heappop(self._queue)[4])
                self._deliver(dst, batch)
            else:
                engine = self.engines[dst]
                if payload == engine.token and not engine.halted:
                    self.trace.records.append(
                        TraceRecord(time, TIMER, dst=dst, round=str(engine.round), epoch=engine.e)
                    )
                    self._apply(dst, engine.on_timer(payload))
            terminated = self._all_decided()
        self.trace.terminated = terminated
        self.trace.end_time = self.now
        self.trace.store_peaks = {v: e.store.peak for v, e in sorted(self.engines.items())}
        return self.trace

    def _deliver(self, dst: int, batch: List[InFlightMessage]) -> None:
        for fl in batch:
            self.trace.records.append(
                TraceRecord(self.now, DELIVER, fl.src, dst, fl.msg, fl.signer, fl.sent_at)
            )
        if dst in self.byzantine:
            for fl in batch:
                self.adversary.on_deliver(self, dst, fl.msg, fl.signer)
            return
        engine = self.engines[dst]
        for fl in batch:
            engine.receive(fl.msg, fl.signer)
        self._apply(dst, engine.poll())


def run(engines: Mapping[int, object], q: QuorumParams, config: NetworkConfig, adversary=None,
        horizon: int = 10_000, height: int = 0) -> Trace:
    return Simulation(engines, q, config, adversary, horizon, height).run()
