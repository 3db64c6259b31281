"""Outage-centric mobility simulator for a 28 GHz multi-beam cellular network."""

from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .experiment import emit_report, run_experiment, verify_report
from .kpi import KpiReport, compute_report, mot, mtbo, outage_percentage
from .outage import OutageCause, OutageInterval, OutageSession, SessionClass, merge_sessions
from .simulation import run_scenario, simulate

__all__ = [
    "ConfigError", "KpiReport", "OutageCause", "OutageInterval", "OutageSession",
    "ScenarioConfig", "SessionClass", "compute_report", "emit_report", "load_config",
    "merge_sessions", "mot", "mtbo", "outage_percentage", "parse_config", "run_experiment",
    "run_scenario", "simulate", "verify_report",
]

__version__ = "0.1.0"
