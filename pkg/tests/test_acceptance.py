"""End-to-end acceptance checks; each prints one PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from oracles import random_trace, sessions_oracle
from mobrel.config import ScenarioConfig, to_us
from mobrel.experiment import emit_report, run_experiment, verify_report
from mobrel.kpi import compute_report
from mobrel.outage import OutageCause, SessionClass, merge_sessions
from mobrel.procedures import UeProcedure

DESK = ScenarioConfig(n_ue=42, sim_time=30.0, tick=0.01, seed=0)
SEEDS = 10
N_SYNTHETIC = 10_000


def verdict(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def desk():
    t0 = time.perf_counter()
    speed = run_experiment(DESK, [(60, False), (120, False)], SEEDS)
    t_speed = time.perf_counter() - t0
    blocked = run_experiment(DESK, [(60, True)], SEEDS)
    return {"v60": speed[:SEEDS], "v120": speed[SEEDS:], "v60b": blocked, "t_speed": t_speed}


def mean(reports, field):
    return float(np.mean([getattr(r, field) for r in reports]))


def rel_err(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def test_1_kpi_identities(desk):
    worst = 0.0
    reports = desk["v60"] + desk["v120"] + desk["v60b"]
    rng = np.random.default_rng(2024)
    cfg = ScenarioConfig(n_ue=3, sim_time=30.0)
    for _ in range(N_SYNTHETIC):
        reports.append(compute_report(random_trace(rng, cfg.contiguity_tol, n_ue=3), cfg))
    checked = 0
    for r in reports:
        if r.n_sessions == 0:
            continue
        nt = r.n_ue * r.sim_time
        worst = max(worst, rel_err(r.mot + r.mtbo, nt / r.n_sessions),
                    rel_err(r.total_outage_pct, 100 * r.mot * r.n_sessions / nt))
        checked += 1
    verdict(1, worst < 1e-9, f"{checked} reports, worst relative error {worst:.2e} (< 1e-9)")


def test_2_oracle_equivalence():
    rng = np.random.default_rng(7)
    tol = DESK.contiguity_tol
    mismatches = 0
    n_sessions = 0
    for _ in range(N_SYNTHETIC):
        ivs = random_trace(rng, tol)
        got = merge_sessions(ivs, tol)
        want = sessions_oracle(ivs, tol)
        n_sessions += len(want)
        same = len(got) == len(want) and all(
            s.constituents == tuple(ivs[k] for k in idx)
            and (s.session_class.value if s.session_class else None) == cls
            for s, (_, idx, cls) in zip(got, want))
        mismatches += not same
    verdict(2, mismatches == 0,
            f"{N_SYNTHETIC} synthetic traces, {n_sessions} sessions, {mismatches} mismatches")


def test_3_structural_invariants(desk):
    n_rlf = bad_rlf = inadmissible = 0
    for r in desk["v60"] + desk["v120"] + desk["v60b"]:
        for s in merge_sessions(r.intervals, DESK.contiguity_tol):
            if s.session_class is None:
                inadmissible += 1
            elif s.session_class is SessionClass.RLF:
                n_rlf += 1
                bad_rlf += not (len(s.causes) >= 2 and s.causes[-2] is OutageCause.BFR_FAILURE)
    verdict(3, bad_rlf == 0 and inadmissible == 0,
            f"{n_rlf} RLF sessions, {bad_rlf} without BFR_FAILURE, {inadmissible} inadmissible")


def test_4_speed_trend(desk):
    a, b = desk["v60"], desk["v120"]
    ho = mean(a, "ho_success_rate"), mean(b, "ho_success_rate")
    mf = mean(a, "mobility_failure_rate"), mean(b, "mobility_failure_rate")
    mot = mean(a, "mot"), mean(b, "mot")
    mtbo = mean(a, "mtbo"), mean(b, "mtbo")
    ok = ho[1] > ho[0] and mf[1] > mf[0] and mot[1] > mot[0] and mtbo[1] < mtbo[0]
    fast = desk["t_speed"] < 60.0
    verdict(4, ok and fast,
            f"60->120 km/h: HO {ho[0]:.1f}->{ho[1]:.1f} (ref 19.3->31.3), "
            f"MF {mf[0]:.2f}->{mf[1]:.2f} (ref 0.5->2.4), "
            f"MOT {1e3 * mot[0]:.1f}->{1e3 * mot[1]:.1f} ms (ref 68->81), "
            f"MTBO {mtbo[0]:.2f}->{mtbo[1]:.2f} s (ref 2.17->1.14); "
            f"{2 * SEEDS} runs in {desk['t_speed']:.1f} s (target < 60 s)")


def test_5_hand_blockage_trend(desk):
    a, b = desk["v60"], desk["v60b"]
    ho = mean(a, "ho_success_rate"), mean(b, "ho_success_rate")
    mf = mean(a, "mobility_failure_rate"), mean(b, "mobility_failure_rate")
    mot = mean(a, "mot"), mean(b, "mot")
    mtbo = mean(a, "mtbo"), mean(b, "mtbo")
    d_mot = (mot[1] - mot[0]) / mot[0]
    d_mtbo = (mtbo[1] - mtbo[0]) / mtbo[0]
    ok = ho[1] < ho[0] and mf[1] > mf[0] and mot[1] > mot[0] and abs(d_mtbo) < abs(d_mot)
    verdict(5, ok,
            f"free->blocked: HO {ho[0]:.1f}->{ho[1]:.1f}, MF {mf[0]:.2f}->{mf[1]:.2f}, "
            f"MOT {1e3 * mot[0]:.1f}->{1e3 * mot[1]:.1f} ms ({100 * d_mot:+.0f}%), "
            f"MTBO {mtbo[0]:.2f}->{mtbo[1]:.2f} s ({100 * d_mtbo:+.0f}%)")


def _drive(cfg, until_s, sinr_fn, l3_fn):
    n_c, n_b = cfg.n_cells, cfg.n_beams
    p = UeProcedure(0, cfg, 0, 0)
    l1 = np.where(np.arange(n_b) == 0, -80.0, -85.0) * np.ones((n_c, 1))
    tick, ssb = to_us(cfg.tick), to_us(cfg.ssb_period)
    for t in range(0, to_us(until_s), tick):
        p.step(t, sinr_fn(t), l1, l3_fn(t), t % ssb == 0)
    return [(iv.cause, to_us(iv.t_end) - to_us(iv.t_start)) for iv in p.finalize(to_us(until_s))]


def test_6_timer_fidelity():
    cfg = ScenarioConfig()
    shape = (cfg.n_cells, cfg.n_beams)

    def l3_neighbour(t):
        v = np.full(cfg.n_cells, -100.0)
        v[0], v[1] = -90.0, -85.0
        return v

    def l3_serving(t):
        v = np.full(cfg.n_cells, -100.0)
        v[0] = -80.0
        return v

    def target_blocked(t):
        s = np.full(shape, 5.0)
        if t < 400_000:
            s[1] = -12.0
        return s

    clean = _drive(cfg, 1.0, lambda t: np.full(shape, 5.0), l3_neighbour)
    hof = _drive(cfg, 1.0, target_blocked, l3_neighbour)
    rlf = _drive(cfg, 1.0, lambda t: np.full(shape, -15.0 if t < 200_000 else 5.0), l3_serving)
    C = OutageCause
    ok = (clean == [(C.HO_SUCCESS, 55_000)] and hof[:1] == [(C.HO_FAILURE, 380_000)]
          and rlf[-2:] == [(C.BFR_FAILURE, 100_000), (C.RLF, 180_000)])
    verdict(6, ok, f"clean HO {clean[0][1] / 1e3:g} ms, HO failure {hof[0][1] / 1e3:g} ms, "
                   f"RLF {rlf[-1][1] / 1e3:g} ms after BFR failure")


def test_7_determinism(tmp_path):
    cfg = ScenarioConfig(n_ue=42, sim_time=5.0, seed=123)
    outs = []
    for k in range(2):
        reports = run_experiment(cfg, [(60, False), (120, True)], 1)
        emit_report(reports, tmp_path / str(k), trace=True)
        outs.append({p.name: p.read_bytes() for p in (tmp_path / str(k)).iterdir()})
    same = outs[0].keys() == outs[1].keys() and all(outs[0][n] == outs[1][n] for n in outs[0])
    verdict(7, same, f"{len(outs[0])} files byte-identical across repeated runs")


def test_8_full_scale_smoke(tmp_path):
    cfg = ScenarioConfig(seed=0)  # 420 UEs, 30 s
    t0 = time.perf_counter()
    reports = run_experiment(cfg, [(60, False)], 1)
    elapsed = time.perf_counter() - t0
    emit_report(reports, tmp_path, trace=True)
    problems = verify_report(tmp_path)
    r = reports[0]
    verdict(8, elapsed < 600 and not problems,
            f"420 UEs x 30 s in {elapsed:.0f} s (< 600 s); verify: "
            f"{'exact' if not problems else problems[:3]}; HO {r.ho_success_rate:.1f}, "
            f"MF {r.mobility_failure_rate:.2f} /UE/min, MOT {1e3 * r.mot:.1f} ms, "
            f"MTBO {r.mtbo:.2f} s")
