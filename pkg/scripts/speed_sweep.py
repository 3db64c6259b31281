"""Seed-averaged speed and hand-blockage sweep at desk scale.

    python3 scripts/speed_sweep.py --out runs/sweep --seeds 10
"""

import argparse
import time
from collections import defaultdict

import numpy as np

from mobrel.config import ScenarioConfig, load_config
from mobrel.experiment import emit_report, run_experiment

# published values at 420 UEs, kept for side-by-side reading only
REFERENCE = {
    (60.0, False): dict(ho=19.3, mf=0.5, mot=68.0, mtbo=2.17),
    (120.0, False): dict(ho=31.3, mf=2.4, mot=81.0, mtbo=1.14),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default=None, help="base config (default: 42 UEs, 30 s)")
    ap.add_argument("--out", default=None, help="write kpi.csv/kpi.json here")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--speeds", default="30,60,120")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()

    cfg = load_config(args.config) if args.config else ScenarioConfig(n_ue=42, sim_time=30.0)
    speeds = [float(v) for v in args.speeds.split(",")]
    sweep = [(v, b) for v in speeds for b in (False, True)]
    t0 = time.perf_counter()
    reports = run_experiment(cfg, sweep, args.seeds, workers=args.workers)
    elapsed = time.perf_counter() - t0

    groups = defaultdict(list)
    for r in reports:
        groups[(r.speed_kmh, r.hand_blockage)].append(r)
    print(f"{len(reports)} runs of {cfg.n_ue} UEs x {cfg.sim_time:g} s in {elapsed:.1f} s\n")
    print(f"{'speed':>6} {'blockage':>8} {'HO/UE/min':>10} {'MF/UE/min':>10} {'MOT ms':>8} "
          f"{'MTBO s':>7} {'outage %':>9}   reference")
    for key, rs in groups.items():
        mot = [r.mot for r in rs if r.mot is not None]
        mtbo = [r.mtbo for r in rs if r.mtbo is not None]
        ref = REFERENCE.get(key)
        ref_txt = (f"HO {ref['ho']}, MF {ref['mf']}, MOT {ref['mot']:g}, MTBO {ref['mtbo']}"
                   if ref else "")
        print(f"{key[0]:6g} {'on' if key[1] else 'off':>8} "
              f"{np.mean([r.ho_success_rate for r in rs]):10.2f} "
              f"{np.mean([r.mobility_failure_rate for r in rs]):10.2f} "
              f"{1e3 * np.mean(mot):8.1f} {np.mean(mtbo):7.2f} "
              f"{np.mean([r.total_outage_pct for r in rs]):9.2f}   {ref_txt}")
    if args.out:
        emit_report(reports, args.out, force=args.force)
        print(f"\nreports written to {args.out}")


if __name__ == "__main__":
    main()
