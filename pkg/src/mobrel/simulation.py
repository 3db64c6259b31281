"""Tick-based single-run simulation loop."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig, to_us
from .deployment import build_grid, drop_ues, move_in_disc
from .kpi import KpiReport, compute_report
from .measurement import FilterBank, measure_all
from .outage import OutageInterval
from .procedures import UeProcedure
from .radio import FastFading, RadioModel, ShadowField

log = logging.getLogger(__name__)


def rng_streams(seed: int) -> dict[str, np.random.Generator]:
    """Independent named streams so that e.g. blockage on/off share drops, shadowing and fading."""
    names = ("drop", "los", "shadow", "fading")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {n: np.random.default_rng(s) for n, s in zip(names, children)}


@dataclass
class RunResult:
    intervals: list[OutageInterval]
    procedures: list[UeProcedure]
    radio: RadioModel


def simulate(cfg: ScenarioConfig, skip_quiet: bool = True, reference: bool = False) -> RunResult:
    """Run one scenario and return every UE's outage intervals, ordered by (ue, t_start).

    ``skip_quiet`` skips procedure steps that provably change nothing;
    ``reference`` swaps the compiled link kernel for the numpy one. Neither
    changes the result.
    """
    cfg.validate()
    rngs = rng_streams(cfg.seed)
    cells = build_grid(cfg)
    ues = drop_ues(cfg, rngs["drop"])
    xy = np.array([u.position for u in ues], dtype=float).reshape(-1, 2)
    heading = np.array([u.heading for u in ues], dtype=float)
    radio = RadioModel.build(cfg, cells, xy, rngs["los"], rngs["shadow"], rngs["fading"])
    bank = FilterBank.from_config(cfg, batch=(cfg.n_ue,))

    tick_us, ssb_us = to_us(cfg.tick), to_us(cfg.ssb_period)
    step_dist = cfg.speed_mps * cfg.tick
    rho = FastFading.correlation(cfg.speed_mps, cfg.tick, cfg.coherence_dist)
    radius = cfg.region_radius
    gamma_out = cfg.gamma_out

    procs: list[UeProcedure] = []
    serving = np.zeros((cfg.n_ue, 2), dtype=np.int64)
    for n in range(cfg.n_ticks):
        t = n * tick_us
        if n:
            if step_dist > 0:
                xy, heading = move_in_disc(xy, heading, step_dist, radius)
            radio.fading.step(rho)
        snap = (radio.snapshot_reference if reference else radio.snapshot)(xy, heading, t)
        ssb = t % ssb_us == 0
        if ssb:
            measure_all(bank, snap.rsrp)
        l1, l3, sinr = bank.l1, bank.l3, snap.sinr
        if n == 0:
            for u in range(cfg.n_ue):
                c = int(np.argmax(l3[u]))
                procs.append(UeProcedure(u, cfg, c, int(np.argmax(l1[u, c]))))
                serving[u] = (c, procs[u].state.serving_beam)
        if not skip_quiet:
            active = range(cfg.n_ue)
        elif ssb:
            active = np.flatnonzero(~quiet_mask(procs, serving, sinr, l1, l3, cfg)).tolist()
        else:
            s_sinr = sinr[np.arange(cfg.n_ue), serving[:, 0], serving[:, 1]]
            active = np.flatnonzero((s_sinr < gamma_out) | ~idle_mask(procs)).tolist()
        for u in active:
            p = procs[u]
            p.step(t, sinr[u], l1[u], l3[u], ssb)
            serving[u, 0] = p.state.serving_cell
            serving[u, 1] = p.state.serving_beam
    t_end = cfg.n_ticks * tick_us
    intervals = [iv for p in procs for iv in p.finalize(t_end)]
    return RunResult(intervals, procs, radio)


def quiet_mask(procs: list[UeProcedure], serving: np.ndarray, sinr: np.ndarray,
               l1: np.ndarray, l3: np.ndarray, cfg: ScenarioConfig) -> np.ndarray:
    """UEs for which an SSB-tick step is provably a no-op.

    Such a UE is connected with nothing pending, keeps its beam, has no
    neighbour above the smallest CHO offset and sees healthy serving SINR.
    """
    rows = np.arange(len(procs))
    cell, beam = serving[:, 0], serving[:, 1]
    calm = np.fromiter((p.calm for p in procs), dtype=bool, count=len(procs))
    same_beam = np.argmax(l1[rows, cell], axis=1) == beam
    no_neighbour = l3.max(axis=1) <= l3[rows, cell] + min(cfg.o_prep, cfg.o_exec)
    healthy = sinr[rows, cell, beam] >= cfg.gamma_out
    return calm & same_beam & no_neighbour & healthy


def shadow_field(cfg: ScenarioConfig) -> ShadowField:
    """The shadowing field a run with this config's seed uses."""
    return ShadowField.generate(cfg.n_cells, cfg.region_radius, cfg.shadow_grid_res,
                                cfg.shadow_decorr_dist, rng_streams(cfg.seed)["shadow"])


def idle_mask(procs: list[UeProcedure]) -> np.ndarray:
    return np.fromiter((p.idle for p in procs), dtype=bool, count=len(procs))


def run_scenario(cfg: ScenarioConfig, scenario: str = "") -> KpiReport:
    result = simulate(cfg)
    report = compute_report(result.intervals, cfg, scenario)
    log.info("%s: %d intervals, %d sessions", scenario or "run", report.n_intervals,
             report.n_sessions)
    return report
