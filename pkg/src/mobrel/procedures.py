"""Per-UE protocol state machines: conditional handover with RACH, beam
management, beam failure detection/recovery, RLF and re-establishment.

All times inside this module are integer microseconds. Emitted
:class:`OutageInterval` objects carry seconds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import ScenarioConfig, to_us
from .outage import OutageCause, OutageInterval


class Mode(str, Enum):
    CONNECTED = "CONNECTED"
    HO_EXECUTING = "HO_EXECUTING"
    BFR_IN_PROGRESS = "BFR_IN_PROGRESS"
    REESTABLISHING = "REESTABLISHING"


@dataclass
class ProcState:
    serving_cell: int
    serving_beam: int
    mode: Mode = Mode.CONNECTED
    prepared_cells: set[int] = field(default_factory=set)
    prep_since: dict[int, int] = field(default_factory=dict)
    exec_since: dict[int, int] = field(default_factory=dict)
    bfd_counter: int = 0
    rach_attempts: int = 0
    target_cell: int | None = None
    # absolute deadlines, us; None when not running
    next_attempt: int | None = None
    hof_deadline: int | None = None
    res_deadline: int | None = None
    bfr_deadline: int | None = None
    bfr_recover_at: int | None = None
    bfr_candidate: int | None = None
    # SINR-degradation accounting resumes at this instant after a procedure completes
    settle_until: int = 0


_TIMERS = ("next_attempt", "hof_deadline", "res_deadline", "bfr_deadline", "bfr_recover_at")


class UeProcedure:
    """Drives one UE's procedures tick by tick and records its outage intervals.

    Call :meth:`step` once per tick with that tick's average-SINR table
    (cells x beams), the latest L1 table and the latest L3 map; ``ssb`` marks
    ticks on the SSB grid, where measurements and indications are fresh.
    """

    def __init__(self, ue_id: int, cfg: ScenarioConfig, serving_cell: int, serving_beam: int):
        self.ue_id = ue_id
        self.cfg = cfg
        self.state = ProcState(serving_cell, serving_beam)
        self.intervals: list[OutageInterval] = []
        self._open_at: int | None = None
        self._open_cause: OutageCause | None = None

        self.tick = to_us(cfg.tick)
        self.t_ho = to_us(cfg.t_ho)
        self.t_hof = to_us(cfg.t_hof)
        self.t_res = to_us(cfg.t_res)
        self.t_rach = to_us(cfg.t_rach)
        self.t_bfr_max = to_us(cfg.t_bfr_max)
        self.ttt_prep = to_us(cfg.ttt_prep)
        self.ttt_exec = to_us(cfg.ttt_exec)
        self.gamma_out = cfg.gamma_out
        self.gamma_in = cfg.gamma_in

    # -- interval bookkeeping ------------------------------------------------

    @property
    def open_cause(self) -> OutageCause | None:
        return self._open_cause

    def _open(self, t: int, cause: OutageCause) -> None:
        assert self._open_at is None, "UE already has an open outage interval"
        self._open_at = t
        self._open_cause = cause

    def _close(self, t: int, cause: OutageCause | None = None) -> None:
        start, cause = self._open_at, cause or self._open_cause
        self._open_at = self._open_cause = None
        if t > start:
            self.intervals.append(OutageInterval(self.ue_id, start / 1e6, t / 1e6, cause))

    def finalize(self, t_end: int) -> list[OutageInterval]:
        """Close any open interval at the end of the run.

        A BFR still running is labelled BFR_SUCCESS so the truncated session
        stays admissible.
        """
        if self._open_at is not None:
            self._close(t_end)
        return self.intervals

    # -- per-tick driver -----------------------------------------------------

    @property
    def idle(self) -> bool:
        """True when a non-SSB tick with healthy SINR cannot change anything."""
        return self.state.mode is Mode.CONNECTED and self._open_at is None

    @property
    def calm(self) -> bool:
        """Idle with no link-monitoring count and no CHO clock running."""
        st = self.state
        return (self.idle and st.bfd_counter == 0 and not st.prep_since
                and not st.exec_since)

    def step(self, t: int, sinr: np.ndarray, l1: np.ndarray, l3: np.ndarray, ssb: bool) -> None:
        st = self.state
        self._run_timers(t, sinr, l1, l3)
        if st.mode is Mode.BFR_IN_PROGRESS and st.bfr_recover_at is None:
            self._bfr_search(t, sinr)
        if ssb:
            if st.mode is Mode.CONNECTED:
                self.beam_update(l1)
            if st.mode is Mode.CONNECTED or (st.mode is Mode.BFR_IN_PROGRESS
                                             and st.bfr_recover_at is None):
                target = self.cho_step(t, l3)
                if target is not None:
                    self._start_ho(t, target)
            if st.mode is Mode.CONNECTED:
                self.rlm_step(t, sinr)
        if st.mode is Mode.CONNECTED:
            self.sinr_outage_step(t, sinr)

    def _run_timers(self, t: int, sinr, l1, l3) -> None:
        st = self.state
        while True:
            due, name = None, None
            for n in _TIMERS:
                v = getattr(st, n)
                if v is not None and v <= t and (due is None or v < due):
                    due, name = v, n
            if name is None:
                return
            setattr(st, name, None)
            if name == "next_attempt":
                self._rach_attempt(due, sinr, l1)
            elif name == "hof_deadline":
                st.next_attempt = None
                st.mode = Mode.REESTABLISHING
                self._open_cause = OutageCause.HO_FAILURE
                st.res_deadline = due + self.t_res
            elif name == "res_deadline":
                self._close(due)
                cell = int(np.argmax(l3))
                self._reconnect(due, cell, int(np.argmax(l1[cell])), keep_cho=False)
            elif name == "bfr_deadline":
                self._close(due, OutageCause.BFR_FAILURE)
                self._open(due, OutageCause.RLF)
                st.mode = Mode.REESTABLISHING
                st.res_deadline = due + self.t_res
            elif name == "bfr_recover_at":
                self._close(due, OutageCause.BFR_SUCCESS)
                self._reconnect(due, st.serving_cell, st.bfr_candidate, keep_cho=True)

    def _reconnect(self, t: int, cell: int, beam: int, keep_cho: bool) -> None:
        st = self.state
        if cell != st.serving_cell or not keep_cho:
            st.prepared_cells.clear()
            st.prep_since.clear()
            st.exec_since.clear()
        st.serving_cell, st.serving_beam = cell, beam
        st.mode = Mode.CONNECTED
        st.bfd_counter = 0
        st.rach_attempts = 0
        st.target_cell = None
        st.bfr_candidate = None
        for n in _TIMERS:
            setattr(st, n, None)
        st.settle_until = t + self.tick

    # -- beam management -----------------------------------------------------

    def beam_update(self, l1: np.ndarray) -> int:
        """Serve on the serving cell's strongest L1 beam (lowest id on ties)."""
        st = self.state
        st.serving_beam = int(np.argmax(l1[st.serving_cell]))
        return st.serving_beam

    # -- conditional handover ------------------------------------------------

    def cho_step(self, t: int, l3: np.ndarray) -> int | None:
        """Update CHO preparation/execution clocks; return a target cell once
        its execution condition has held for ``ttt_exec``."""
        st, cfg = self.state, self.cfg
        vals = l3.tolist()
        s = st.serving_cell
        ref = vals[s]
        if max(vals) <= ref + min(cfg.o_prep, cfg.o_exec) and not st.prep_since \
                and not st.exec_since:
            return None
        prep_thr, exec_thr = ref + cfg.o_prep, ref + cfg.o_exec
        # clocks of cells that fell back below their threshold stop
        for n in [n for n in st.prep_since if n != s and not vals[n] > prep_thr]:
            del st.prep_since[n]
        for n in [n for n in st.exec_since
                  if n != s and not (n in st.prepared_cells and vals[n] > exec_thr)]:
            del st.exec_since[n]
        floor = min(prep_thr, exec_thr)
        best, best_val = None, None
        for n, v in enumerate(vals):
            if n == s or not v > floor:
                continue
            if v > prep_thr:
                since = st.prep_since.setdefault(n, t)
                if t - since >= self.ttt_prep:
                    st.prepared_cells.add(n)
            if n in st.prepared_cells and v > exec_thr:
                since = st.exec_since.setdefault(n, t)
                if t - since >= self.ttt_exec and (best is None or v > best_val):
                    best, best_val = n, v
        return best

    def _start_ho(self, t: int, target: int) -> None:
        st = self.state
        if self._open_at is not None:
            # SINR degradation or a beam recovery overtaken by the handover
            closing = OutageCause.BFR_SUCCESS if st.mode is Mode.BFR_IN_PROGRESS \
                else self._open_cause
            self._close(t, closing)
        self._open(t, OutageCause.HO_SUCCESS)
        st.mode = Mode.HO_EXECUTING
        st.target_cell = target
        st.rach_attempts = 0
        st.bfr_deadline = st.bfr_recover_at = None
        st.bfr_candidate = None
        st.next_attempt = t + self.t_ho
        st.hof_deadline = t + self.t_hof

    def _rach_attempt(self, ta: int, sinr: np.ndarray, l1: np.ndarray) -> None:
        """One random-access attempt toward the CHO target; succeeds iff the
        target beam's average SINR exceeds ``gamma_out``."""
        st = self.state
        st.rach_attempts += 1
        target = st.target_cell
        beam = int(np.argmax(l1[target]))
        if sinr[target, beam] > self.gamma_out:
            self._close(ta, OutageCause.HO_SUCCESS)
            st.hof_deadline = None
            self._reconnect(ta, target, beam, keep_cho=False)
            return
        nxt = ta + self.t_rach
        if st.rach_attempts < self.cfg.max_rach_attempts and nxt <= st.hof_deadline:
            st.next_attempt = nxt
        else:
            # no further attempts; wait out the HOF timer
            self._open_cause = OutageCause.HO_FAILURE

    # -- radio link monitoring -----------------------------------------------

    def rlm_step(self, t: int, sinr: np.ndarray) -> bool:
        """One radio-link indication; returns True when beam failure is declared."""
        st = self.state
        if sinr[st.serving_cell, st.serving_beam] < self.gamma_out:
            st.bfd_counter += 1
            if st.bfd_counter >= self.cfg.n_bfd:
                self._start_bfr(t, sinr)
                return True
        else:
            st.bfd_counter = 0
        return False

    def _start_bfr(self, t: int, sinr: np.ndarray) -> None:
        st = self.state
        if self._open_at is not None:
            self._close(t)
        self._open(t, OutageCause.BFR_SUCCESS)
        st.mode = Mode.BFR_IN_PROGRESS
        st.bfd_counter = 0
        st.bfr_deadline = t + self.t_bfr_max
        self._bfr_search(t, sinr)

    def _bfr_search(self, t: int, sinr: np.ndarray) -> None:
        st = self.state
        row = sinr[st.serving_cell]
        b = int(np.argmax(row))
        if row[b] > self.gamma_in:
            st.bfr_candidate = b
            st.bfr_recover_at = t + self.t_rach
            st.bfr_deadline = None

    # -- SINR degradation ----------------------------------------------------

    def sinr_outage_step(self, t: int, sinr: np.ndarray) -> None:
        """Track outage from low serving SINR while no procedure is running."""
        st = self.state
        s = sinr[st.serving_cell, st.serving_beam]
        if self._open_cause is OutageCause.SINR_DEGRADATION:
            if s >= self.gamma_out:
                self._close(t)
        elif self._open_at is None and s < self.gamma_out and t >= st.settle_until:
            self._open(t, OutageCause.SINR_DEGRADATION)
