"""Outage percentage, MTBO, MOT and mobility-rate KPIs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .config import ScenarioConfig
from .outage import OutageCause, OutageInterval, OutageSession, SessionClass, merge_sessions


class NoOutageSessions(ValueError):
    """MOT/MTBO are undefined over an empty session set."""


NO_OUTAGE = "no-outage"


def outage_percentage(intervals: Iterable[OutageInterval], n_ue: int,
                      t_sim: float) -> tuple[float, dict[OutageCause, float]]:
    """Total and per-cause outage as a percentage of ``n_ue * t_sim``."""
    if n_ue <= 0 or t_sim <= 0:
        raise ValueError("n_ue and t_sim must be positive")
    by_cause: dict[OutageCause, list[float]] = {c: [] for c in OutageCause}
    for iv in intervals:
        by_cause[iv.cause].append(iv.duration)
    denom = n_ue * t_sim
    total = 100.0 * math.fsum(d for ds in by_cause.values() for d in ds) / denom
    return total, {c: 100.0 * math.fsum(ds) / denom for c, ds in by_cause.items()}


def _session_time(sessions: Sequence[OutageSession]) -> float:
    return math.fsum(iv.duration for s in sessions for iv in s.constituents)


def mot(sessions: Sequence[OutageSession]) -> float:
    """Mean outage time: mean session duration."""
    if not sessions:
        raise NoOutageSessions("mean outage time undefined without outage sessions")
    return _session_time(sessions) / len(sessions)


def mtbo(sessions: Sequence[OutageSession], n_ue: int, t_sim: float) -> float:
    """Mean time between outages over the session set pooled across all UEs."""
    if not sessions:
        raise NoOutageSessions("mean time between outages undefined without outage sessions")
    return (n_ue * t_sim - _session_time(sessions)) / len(sessions)


def mobility_rates(counts: dict[str, int], n_ue: int, t_sim: float) -> dict[str, float]:
    """Convert event counts to events per UE per minute."""
    if t_sim <= 0:
        raise ValueError("t_sim must be positive")
    scale = n_ue * t_sim / 60.0
    return {k: v / scale for k, v in counts.items()}


@dataclass
class KpiReport:
    scenario: str
    speed_kmh: float
    hand_blockage: bool
    seed: int
    config_hash: str
    n_ue: int
    sim_time: float
    n_intervals: int
    n_sessions: int
    n_inadmissible: int
    sessions_by_class: dict[str, int]
    n_ho_success: int
    n_mobility_failures: int
    ho_success_rate: float
    mobility_failure_rate: float
    outage_pct_by_component: dict[str, float]
    total_outage_pct: float
    mot: float | None
    mtbo: float | None
    kpi_status: str
    config: dict[str, Any] = field(default_factory=dict)
    intervals: list[OutageInterval] = field(default_factory=list, repr=False, compare=False)

    @property
    def mdt(self) -> float | None:
        return self.mot

    @property
    def mtbf(self) -> float | None:
        return self.mtbo

    def to_json(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "speed_kmh": self.speed_kmh,
            "hand_blockage": self.hand_blockage,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "n_ue": self.n_ue,
            "sim_time": self.sim_time,
            "n_intervals": self.n_intervals,
            "n_sessions": self.n_sessions,
            "n_inadmissible": self.n_inadmissible,
            "sessions_by_class": dict(self.sessions_by_class),
            "n_ho_success": self.n_ho_success,
            "n_mobility_failures": self.n_mobility_failures,
            "ho_success_rate": self.ho_success_rate,
            "mobility_failure_rate": self.mobility_failure_rate,
            "outage_pct_by_component": dict(self.outage_pct_by_component),
            "total_outage_pct": self.total_outage_pct,
            "mot": self.mot,
            "mtbo": self.mtbo,
            "mdt": self.mdt,
            "mtbf": self.mtbf,
            "kpi_status": self.kpi_status,
            "config": self.config,
        }


def compute_report(intervals: Sequence[OutageInterval], cfg: ScenarioConfig,
                   scenario: str = "") -> KpiReport:
    """Assemble every KPI of one run from its interval trace."""
    intervals = list(intervals)
    sessions = merge_sessions(intervals, cfg.contiguity_tol)
    by_class = {c.value: 0 for c in SessionClass}
    n_bad = 0
    for s in sessions:
        if s.session_class is None:
            n_bad += 1
        else:
            by_class[s.session_class.value] += 1
    n_mf = by_class[SessionClass.HO_FAILURE.value] + by_class[SessionClass.RLF.value]
    n_ho = by_class[SessionClass.SUCCESSFUL_HO.value]
    rates = mobility_rates({"ho": n_ho, "mf": n_mf}, cfg.n_ue, cfg.sim_time)
    total, per_cause = outage_percentage(intervals, cfg.n_ue, cfg.sim_time)
    if sessions:
        m, b, status = mot(sessions), mtbo(sessions, cfg.n_ue, cfg.sim_time), "ok"
    else:
        m, b, status = None, None, NO_OUTAGE
    return KpiReport(
        scenario=scenario,
        speed_kmh=cfg.ue_speed,
        hand_blockage=cfg.hand_blockage,
        seed=cfg.seed,
        config_hash=cfg.config_hash(),
        n_ue=cfg.n_ue,
        sim_time=cfg.sim_time,
        n_intervals=len(intervals),
        n_sessions=len(sessions),
        n_inadmissible=n_bad,
        sessions_by_class=by_class,
        n_ho_success=n_ho,
        n_mobility_failures=n_mf,
        ho_success_rate=rates["ho"],
        mobility_failure_rate=rates["mf"],
        outage_pct_by_component={c.value: v for c, v in per_cause.items()},
        total_outage_pct=total,
        mot=m,
        mtbo=b,
        kpi_status=status,
        config=cfg.to_dict(),
        intervals=intervals,
    )
