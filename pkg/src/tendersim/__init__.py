"""Discrete-event simulator for a Tendermint-style BFT consensus protocol."""

from .core import NEVER, Message, QuorumParams, Round, Tag, Value, ValueGenerator, is_valid, proposer
from .es_engine import EsEngine
from .harness import (
    AdversarySpec,
    Metrics,
    RunReport,
    Scenario,
    ScenarioError,
    Verdict,
    check_agreement,
    check_all,
    check_integrity,
    check_lock_safety,
    check_termination,
    check_validity,
    fit_line,
    fit_power_law,
    measure,
    run_scenario,
    simulate,
    sweep,
)
from .msgstore import MessageStore
from .net_sim import NetworkConfig, Simulation
from .sync_engine import SyncEngine
from .trace import Trace

__all__ = [
    "NEVER", "Message", "QuorumParams", "Round", "Tag", "Value", "ValueGenerator", "is_valid", "proposer",
    "EsEngine", "SyncEngine", "MessageStore", "NetworkConfig", "Simulation", "Trace",
    "AdversarySpec", "Metrics", "RunReport", "Scenario", "ScenarioError", "Verdict",
    "check_agreement", "check_all", "check_integrity", "check_lock_safety", "check_termination",
    "check_validity", "fit_line", "fit_power_law", "measure", "run_scenario", "simulate", "sweep",
]
