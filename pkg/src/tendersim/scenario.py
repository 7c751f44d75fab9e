"""Scenario files and report serialization.

Scenario files are INI-style::

    [scenario]
    variant = es
    horizon = 10000
    seed = 0

    [quorum]
    n = 4
    f = 1

    [network]
    delta = 10
    tau = 0            ; or "auto" to let the adversary choose

    [adversary]
    name = silent
    byzantine = 0

    [timeouts]
    pre_propose = 30
    propose = 30
    vote = 30
    step = 1

    [checks]
    max_epochs = 1
"""

from __future__ import annotations

import configparser
import hashlib
import re
from dataclasses import replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from .harness import (
    ADVERSARIES,
    AdversarySpec,
    Metrics,
    RunReport,
    Scenario,
    ScenarioError,
    SweepRow,
)
from .net_sim import NetworkConfig

_SECTIONS = {
    "scenario": ("variant", "horizon", "seed", "payload_bits", "height"),
    "quorum": ("n", "f"),
    "network": ("delta", "tau", "pre_gst", "pre_gst_max", "post_gst"),
    "adversary": ("name", "byzantine", "targets", "epochs", "helpers", "side_a", "side_b", "collude"),
    "timeouts": ("pre_propose", "propose", "vote", "step"),
    "checks": ("max_epochs", "termination"),
}
_ID_LISTS = ("byzantine", "targets", "epochs", "helpers", "side_a", "side_b")


def _line_map(text: str) -> Dict[Tuple[str, str], int]:
    lines: Dict[Tuple[str, str], int] = {}
    section = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            lines[(section, "")] = no
        elif section and line and line[0] not in "#;":
            key = re.split(r"[=:]", line, 1)[0].strip().lower()
            lines[(section, key)] = no
    return lines


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, lines: Dict[Tuple[str, str], int]):
        self.parser = parser
        self.lines = lines

    def error(self, section: str, key: str, message: str) -> ScenarioError:
        return ScenarioError(message, f"{section}.{key}", self.lines.get((section, key)))

    def get(self, section: str, key: str, convert: Callable[[str], Any], default: Any) -> Any:
        if not self.parser.has_option(section, key):
            return default
        raw = self.parser.get(section, key).strip()
        try:
            return convert(raw)
        except (ValueError, KeyError) as exc:
            raise self.error(section, key, f"bad value {raw!r} ({exc})") from None


def _ids(raw: str) -> List[int]:
    return [int(tok) for tok in re.split(r"[,\s]+", raw) if tok]


def _bool(raw: str) -> bool:
    table = {"true": True, "yes": True, "1": True, "on": True,
             "false": False, "no": False, "0": False, "off": False}
    return table[raw.lower()]


def _nonneg(raw: str) -> int:
    value = int(raw)
    if value < 0:
        raise ValueError("must be non-negative")
    return value


def parse_scenario(text: str) -> Scenario:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(exc.message.splitlines()[0], "syntax", getattr(exc, "lineno", None)) from None
    lines = _line_map(text)
    rd = _Reader(parser, lines)
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ScenarioError(f"unknown section [{section}]", section, lines.get((section, "")))
        for key in parser.options(section):
            if key not in _SECTIONS[section]:
                raise rd.error(section, key, "unknown key")
    if not parser.has_section("quorum"):
        raise ScenarioError("missing [quorum] section", "quorum")

    variant = rd.get("scenario", "variant", str.lower, "es")
    if variant not in ("sync", "es"):
        raise rd.error("scenario", "variant", f"expected sync or es, got {variant!r}")
    n = rd.get("quorum", "n", int, None)
    if n is None:
        raise ScenarioError("missing n", "quorum.n", lines.get(("quorum", "")))
    f = rd.get("quorum", "f", _nonneg, (n - 1) // 3)
    if n < 3 * f + 1:
        raise rd.error("quorum", "f", f"n={n} < 3f+1 with f={f}")
    seed = rd.get("scenario", "seed", int, 0)

    tau_raw = rd.get("network", "tau", str.lower, "0")
    tau_auto = tau_raw == "auto"
    try:
        network = NetworkConfig(
            delta=rd.get("network", "delta", int, 10),
            tau=0 if tau_auto else rd.get("network", "tau", _nonneg, 0),
            pre_gst=rd.get("network", "pre_gst", str.lower, "uniform"),
            pre_gst_max=rd.get("network", "pre_gst_max", int, 50),
            post_gst=rd.get("network", "post_gst", str.lower, "fixed"),
            seed=seed,
        )
    except ValueError as exc:
        key = next((k for k in _SECTIONS["network"] if k in str(exc)), "delta")
        raise rd.error("network", key, str(exc)) from None

    name = rd.get("adversary", "name", str.lower, "none")
    if name not in ADVERSARIES:
        raise rd.error("adversary", "name", f"expected one of {', '.join(ADVERSARIES)}")
    params: Dict[str, Any] = {}
    for key in _ID_LISTS:
        value = rd.get("adversary", key, _ids, None)
        if value is not None:
            params[key] = value
    if parser.has_option("adversary", "collude"):
        params["collude"] = rd.get("adversary", "collude", _bool, False)
    byz = params.get("byzantine", [])
    if len(set(byz)) > f:
        raise rd.error("adversary", "byzantine", f"{len(set(byz))} Byzantine validators but f={f}")
    if any(not 0 <= b < n for b in byz):
        raise rd.error("adversary", "byzantine", f"ids must lie in [0, {n})")
    for key in ("targets", "helpers", "side_a", "side_b"):
        if set(params.get(key, ())) & set(byz):
            raise rd.error("adversary", key, "must list correct validators only")

    timeouts = tuple(rd.get("timeouts", k, int, 30) for k in ("pre_propose", "propose", "vote"))
    for k, t in zip(("pre_propose", "propose", "vote"), timeouts):
        if t <= 0:
            raise rd.error("timeouts", k, "must be positive")
    scenario = Scenario(
        variant=variant,
        n=n,
        f=f,
        network=network,
        adversary=AdversarySpec.of(name, **params),
        timeouts=timeouts,
        timeout_step=rd.get("timeouts", "step", _nonneg, 1),
        payload_bits=rd.get("scenario", "payload_bits", _nonneg, 64),
        horizon=rd.get("scenario", "horizon", int, 10_000),
        seed=seed,
        height=rd.get("scenario", "height", _nonneg, 0),
        tau_auto=tau_auto,
        max_epochs=rd.get("checks", "max_epochs", _nonneg, None),
        check_termination=rd.get("checks", "termination", _bool, True),
    )
    if scenario.horizon <= 0:
        raise rd.error("scenario", "horizon", "must be positive")
    scenario.validate()
    return scenario


def load_scenario(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def apply_overrides(s: Scenario, seed: Optional[int] = None, horizon: Optional[int] = None,
                    variant: Optional[str] = None) -> Scenario:
    if seed is not None:
        s = s.with_seed(seed)
    if horizon is not None:
        s = replace(s, horizon=horizon)
    if variant is not None:
        s = replace(s, variant=variant)
    s.validate()
    return s


def dump_scenario(s: Scenario) -> str:
    """Canonical text form; parsing it yields an equal scenario."""
    net = s.network
    out = [
        "[scenario]",
        f"variant = {s.variant}",
        f"horizon = {s.horizon}",
        f"seed = {s.seed}",
        f"payload_bits = {s.payload_bits}",
        f"height = {s.height}",
        "",
        "[quorum]",
        f"n = {s.n}",
        f"f = {s.f}",
        "",
        "[network]",
        f"delta = {net.delta}",
        f"tau = {'auto' if s.tau_auto else net.tau}",
        f"pre_gst = {net.pre_gst}",
        f"pre_gst_max = {net.pre_gst_max}",
        f"post_gst = {net.post_gst}",
        "",
        "[adversary]",
        f"name = {s.adversary.name}",
    ]
    for key, value in s.adversary.params:
        if isinstance(value, bool):
            out.append(f"{key} = {str(value).lower()}")
        else:
            out.append(f"{key} = {' '.join(map(str, value))}")
    pre, prop, vote = s.timeouts
    out += ["", "[timeouts]", f"pre_propose = {pre}", f"propose = {prop}", f"vote = {vote}",
            f"step = {s.timeout_step}", "", "[checks]", f"termination = {str(s.check_termination).lower()}"]
    if s.max_epochs is not None:
        out.append(f"max_epochs = {s.max_epochs}")
    return "\n".join(out) + "\n"


def scenario_digest(s: Scenario) -> str:
    return hashlib.sha256(dump_scenario(s).encode()).hexdigest()[:16]


def _fmt_map(m: Dict[int, int]) -> str:
    return ",".join(f"{k}:{v}" for k, v in sorted(m.items())) or "-"


def metrics_lines(m: Metrics, prefix: str = "metrics.") -> List[str]:
    return [
        f"{prefix}messages_total={m.messages_total}",
        f"{prefix}messages_per_epoch={_fmt_map(m.messages_per_epoch)}",
        f"{prefix}bits_total={m.bits_total}",
        f"{prefix}stored_messages_peak_per_validator={_fmt_map(m.stored_messages_peak_per_validator)}",
        f"{prefix}decision_epoch_per_validator={_fmt_map(m.decision_epoch_per_validator)}",
        f"{prefix}decided_all={str(m.decided_all).lower()}",
    ]


def dump_report(report: RunReport, include_trace: bool = False) -> str:
    s = report.scenario
    out = [
        f"report scenario={scenario_digest(s)} seed={report.seed} variant={s.variant} n={s.n} f={s.f}",
        f"status={'pass' if report.passed else 'fail'}",
    ]
    for v in report.verdicts:
        detail = f" detail={v.detail!r}" if v.detail else ""
        out.append(f"verdict.{v.name}={'pass' if v.passed else 'fail'}{detail}")
    out += metrics_lines(report.metrics)
    text = "\n".join(out) + "\n"
    if include_trace and report.trace is not None:
        text += report.trace.dumps()
    return text


def dump_sweep(rows: Iterable[SweepRow]) -> str:
    header = "n f seed messages_total epoch0_messages bits_total max_store_peak decision_epoch decided_all status"
    out = [header]
    for r in rows:
        m = r.metrics
        peak = max(m.stored_messages_peak_per_validator.values(), default=0)
        dec = m.decision_epoch if m.decision_epoch is not None else "-"
        status = "pass" if all(r.verdicts) else "fail"
        out.append(
            f"{r.n} {r.f} {r.seed} {m.messages_total} {m.messages_per_epoch.get(0, 0)} {m.bits_total} "
            f"{peak} {dec} {str(m.decided_all).lower()} {status}"
        )
    return "\n".join(out) + "\n"
