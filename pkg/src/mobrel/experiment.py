"""Sweep/replication orchestration, report emission and trace-based verification."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Iterable, Sequence

from .config import ScenarioConfig
from .kpi import KpiReport, compute_report
from .outage import OutageCause, OutageInterval, SessionClass, merge_sessions
from .simulation import run_scenario

log = logging.getLogger(__name__)

SweepPoint = tuple[float, bool]  # (speed km/h, hand blockage)

# frozen column order of kpi.csv
KPI_COLUMNS = (
    ["scenario", "speed_kmh", "hand_blockage", "seed", "config_hash", "n_ue", "sim_time",
     "n_intervals", "n_sessions", "n_inadmissible", "n_ho_success", "n_mobility_failures",
     "ho_success_rate", "mobility_failure_rate", "total_outage_pct"]
    + [f"outage_pct_{c.value}" for c in OutageCause]
    + [f"sessions_{c.value}" for c in SessionClass]
    + ["mot", "mtbo", "kpi_status"]
)
TRACE_COLUMNS = ["ue_id", "t_start", "t_end", "cause"]
SESSION_COLUMNS = ["ue_id", "t_start", "t_end", "class", "n_constituents", "causes"]


class ReportError(RuntimeError):
    """Output directory problems and report/trace inconsistencies."""


def scenario_name(speed: float, blockage: bool, rep: int) -> str:
    return f"v{speed:g}_{'blocked' if blockage else 'free'}_r{rep}"


def expand_sweep(cfg: ScenarioConfig, sweep: Iterable[SweepPoint],
                 replications: int) -> list[tuple[str, ScenarioConfig]]:
    """One (name, config) per sweep point and replication; replication r uses seed + r."""
    if replications < 1:
        raise ValueError("replications must be >= 1")
    jobs = []
    for speed, blocked in sweep:
        for r in range(replications):
            c = cfg.replace(ue_speed=float(speed), hand_blockage=bool(blocked), seed=cfg.seed + r)
            jobs.append((scenario_name(speed, blocked, r), c.validate()))
    names = [n for n, _ in jobs]
    if len(set(names)) != len(names):
        raise ValueError("duplicate sweep points")
    return jobs


def _run(job: tuple[str, ScenarioConfig]) -> KpiReport:
    name, c = job
    return run_scenario(c, name)


def run_experiment(cfg: ScenarioConfig, sweep: Sequence[SweepPoint], replications: int = 1,
                   workers: int = 1) -> list[KpiReport]:
    """Run every sweep point and replication. Results come back in sweep order
    regardless of ``workers``; each run itself is single-threaded."""
    jobs = expand_sweep(cfg, sweep, replications)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run, jobs))
    reports = []
    for job in jobs:
        reports.append(_run(job))
        log.info("finished %s", job[0])
    return reports


# -- emission ----------------------------------------------------------------

def _fmt(v: Any) -> str:
    """Exact, locale-free text for CSV cells (floats round-trip via repr)."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def kpi_row(r: KpiReport) -> list[str]:
    row = {
        "scenario": r.scenario, "speed_kmh": r.speed_kmh, "hand_blockage": r.hand_blockage,
        "seed": r.seed, "config_hash": r.config_hash, "n_ue": r.n_ue, "sim_time": r.sim_time,
        "n_intervals": r.n_intervals, "n_sessions": r.n_sessions,
        "n_inadmissible": r.n_inadmissible, "n_ho_success": r.n_ho_success,
        "n_mobility_failures": r.n_mobility_failures, "ho_success_rate": r.ho_success_rate,
        "mobility_failure_rate": r.mobility_failure_rate, "total_outage_pct": r.total_outage_pct,
        "mot": r.mot, "mtbo": r.mtbo, "kpi_status": r.kpi_status,
    }
    for k, v in r.outage_pct_by_component.items():
        row[f"outage_pct_{k}"] = v
    for k, v in r.sessions_by_class.items():
        row[f"sessions_{k}"] = v
    return [_fmt(row[c]) for c in KPI_COLUMNS]


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def kpi_csv(reports: Sequence[KpiReport]) -> str:
    return _csv_text(KPI_COLUMNS, (kpi_row(r) for r in reports))


def kpi_json(reports: Sequence[KpiReport]) -> str:
    return json.dumps({"columns": KPI_COLUMNS, "reports": [r.to_json() for r in reports]},
                      indent=2) + "\n"


def trace_csv(intervals: Sequence[OutageInterval]) -> str:
    rows = ([str(iv.ue_id), repr(iv.t_start), repr(iv.t_end), iv.cause.value]
            for iv in intervals)
    return _csv_text(TRACE_COLUMNS, rows)


def sessions_csv(intervals: Sequence[OutageInterval], tol: float) -> str:
    rows = []
    for s in merge_sessions(intervals, tol):
        cls = s.session_class.value if s.session_class is not None else "INADMISSIBLE"
        rows.append([str(s.ue_id), repr(s.t_start), repr(s.t_end), cls,
                     str(len(s.constituents)), ";".join(c.value for c in s.causes)])
    return _csv_text(SESSION_COLUMNS, rows)


def emit_report(reports: Sequence[KpiReport], out_dir: str | Path, trace: bool = False,
                force: bool = False) -> list[Path]:
    """Write kpi.csv, kpi.json and optionally per-scenario traces; return the paths written."""
    out = Path(out_dir)
    files: dict[str, str] = {"kpi.csv": kpi_csv(reports), "kpi.json": kpi_json(reports)}
    if trace:
        for r in reports:
            tol = ScenarioConfig.from_dict(r.config).contiguity_tol
            files[f"trace_{r.scenario}.csv"] = trace_csv(r.intervals)
            files[f"sessions_{r.scenario}.csv"] = sessions_csv(r.intervals, tol)
    if len(files) != 2 + 2 * len(reports) * trace:
        raise ReportError("scenario names must be unique to write traces")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create {out}: {exc}") from exc
    clash = [n for n in files if (out / n).exists()]
    if clash and not force:
        raise ReportError(f"refusing to overwrite {', '.join(sorted(clash))} in {out} "
                          "(use force)")
    written = []
    for name, text in files.items():
        path = out / name
        try:
            path.write_bytes(text.encode("utf-8"))
        except OSError as exc:
            raise ReportError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    return written


# -- verification ------------------------------------------------------------

def read_trace(path: str | Path) -> list[OutageInterval]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != TRACE_COLUMNS:
        raise ReportError(f"{path}: unexpected trace header")
    return [OutageInterval(int(u), float(a), float(b), OutageCause(c)) for u, a, b, c in rows[1:]]


def verify_report(report_dir: str | Path) -> list[str]:
    """Recompute every KPI from the traces in ``report_dir``.

    Returns a list of mismatch descriptions (empty when everything agrees).
    Raises :class:`ReportError` when files are missing or malformed.
    """
    d = Path(report_dir)
    try:
        doc = json.loads((d / "kpi.json").read_text(encoding="utf-8"))
        csv_text = (d / "kpi.csv").read_text(encoding="utf-8")
    except (OSError, ValueError) as exc:
        raise ReportError(f"cannot read report in {d}: {exc}") from exc
    problems = []
    rebuilt = []
    for stored in doc["reports"]:
        name = stored["scenario"]
        path = d / f"trace_{name}.csv"
        if not path.exists():
            raise ReportError(f"missing trace for {name}; re-run with tracing enabled")
        cfg = ScenarioConfig.from_dict(stored["config"])
        if cfg.config_hash() != stored["config_hash"]:
            problems.append(f"{name}: config hash mismatch")
        fresh = compute_report(read_trace(path), cfg, name)
        rebuilt.append(fresh)
        for key, want in fresh.to_json().items():
            if stored.get(key) != want:
                problems.append(f"{name}: {key} stored={stored.get(key)!r} recomputed={want!r}")
        sess = d / f"sessions_{name}.csv"
        if sess.exists() and sess.read_text(encoding="utf-8") != sessions_csv(
                fresh.intervals, cfg.contiguity_tol):
            problems.append(f"{name}: session export differs from sessions rebuilt from trace")
    if kpi_csv(rebuilt) != csv_text:
        problems.append("kpi.csv differs from the table recomputed from traces")
    return problems
