"""Command-line entry point: ``simulate`` and ``verify`` subcommands."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_config
from .experiment import ReportError, emit_report, run_experiment, verify_report
from .outage import ClassificationError, TraceError
from .simulation import shadow_field

log = logging.getLogger("mobrel")

DEFAULT_SPEEDS = (30.0, 60.0, 120.0)


def _speeds(text: str) -> list[float]:
    try:
        out = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad speed list {text!r}") from exc
    if not out or any(v < 0 for v in out):
        raise argparse.ArgumentTypeError("speeds must be a non-empty list of values >= 0")
    return out


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mobrel", description="mmWave mobility outage simulator")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a speed/blockage sweep and write KPI reports")
    sim.add_argument("--config", required=True, type=Path, help="flat key = value config file")
    sim.add_argument("--out", required=True, type=Path, help="output directory")
    sim.add_argument("--speeds", type=_speeds, default=None,
                     help="comma-separated speeds in km/h (default 30,60,120)")
    sim.add_argument("--blockage", choices=("on", "off", "both"), default=None,
                     help="hand blockage setting (default: from config)")
    sim.add_argument("--reps", type=_positive, default=1, help="seed replications")
    sim.add_argument("--trace", action="store_true", help="write per-UE interval traces")
    sim.add_argument("--force", action="store_true", help="overwrite existing report files")
    sim.add_argument("--workers", type=_positive, default=1, help="parallel runs")
    sim.add_argument("--dump-shadow", action="store_true",
                     help="also write shadow_<cell>.csv grids for the base seed")

    ver = sub.add_parser("verify", help="recompute KPIs from traces and compare")
    ver.add_argument("--report", required=True, type=Path, help="report directory")
    return ap


def _sweep(cfg: ScenarioConfig, speeds, blockage) -> list[tuple[float, bool]]:
    flags = {"on": [True], "off": [False], "both": [False, True],
             None: [cfg.hand_blockage]}[blockage]
    return [(v, b) for v in (speeds or DEFAULT_SPEEDS) for b in flags]


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    sweep = _sweep(cfg, args.speeds, args.blockage)
    reports = run_experiment(cfg, sweep, args.reps, workers=args.workers)
    paths = emit_report(reports, args.out, trace=args.trace, force=args.force)
    if args.dump_shadow:
        paths += shadow_field(cfg).export(args.out / "shadow")
    for r in reports:
        mot = "n/a" if r.mot is None else f"{1e3 * r.mot:.1f} ms"
        mtbo = "n/a" if r.mtbo is None else f"{r.mtbo:.3f} s"
        print(f"{r.scenario}: HO {r.ho_success_rate:.2f}/UE/min, MF "
              f"{r.mobility_failure_rate:.2f}/UE/min, outage {r.total_outage_pct:.2f}%, "
              f"MOT {mot}, MTBO {mtbo}")
    print(f"wrote {len(paths)} files to {args.out}")
    return 0


def cmd_verify(args) -> int:
    problems = verify_report(args.report)
    for p in problems:
        print(f"MISMATCH {p}", file=sys.stderr)
    if problems:
        return 1
    print(f"{args.report}: all KPI fields reproduced from traces")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_verify(args)
    except ConfigError as exc:
        for p in exc.problems:
            print(f"config error: {p}", file=sys.stderr)
        return 2
    except (ReportError, TraceError, ClassificationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
