"""One 420-UE, 30 s run with traces, followed by trace-based verification.

    python3 scripts/full_scale.py --out runs/full --speed 60
"""

import argparse
import time

from mobrel.config import ScenarioConfig
from mobrel.experiment import emit_report, run_experiment, verify_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True)
    ap.add_argument("--speed", type=float, default=60.0)
    ap.add_argument("--blockage", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--force", action="store_true")
    args = ap.parse_args()

    cfg = ScenarioConfig(seed=args.seed)
    t0 = time.perf_counter()
    (r,) = run_experiment(cfg, [(args.speed, args.blockage)], 1)
    print(f"{r.scenario}: {time.perf_counter() - t0:.1f} s, {r.n_intervals} intervals, "
          f"{r.n_sessions} sessions")
    print(f"  HO {r.ho_success_rate:.2f}/UE/min, MF {r.mobility_failure_rate:.2f}/UE/min, "
          f"outage {r.total_outage_pct:.2f}%, MOT {1e3 * r.mot:.1f} ms, MTBO {r.mtbo:.2f} s")
    for cause, pct in r.outage_pct_by_component.items():
        print(f"  {cause:<17} {pct:6.3f}%")
    emit_report([r], args.out, trace=True, force=args.force)
    problems = verify_report(args.out)
    print("verify:", "all fields reproduced" if not problems else problems)


if __name__ == "__main__":
    main()
