"""Outage intervals, contiguous outage sessions and their classification."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence


class OutageCause(str, Enum):
    HO_SUCCESS = "HO_SUCCESS"
    HO_FAILURE = "HO_FAILURE"
    BFR_SUCCESS = "BFR_SUCCESS"
    BFR_FAILURE = "BFR_FAILURE"
    RLF = "RLF"
    SINR_DEGRADATION = "SINR_DEGRADATION"


class SessionClass(str, Enum):
    SUCCESSFUL_HO = "SUCCESSFUL_HO"
    HO_FAILURE = "HO_FAILURE"
    RLF = "RLF"
    BFR_SUCCESS = "BFR_SUCCESS"
    STANDALONE_SINR = "STANDALONE_SINR"


class TraceError(ValueError):
    """Interval trace is corrupt (overlapping or unsorted intervals)."""


class ClassificationError(ValueError):
    """Constituent sequence of a session is not admissible."""


@dataclass(frozen=True)
class OutageInterval:
    """Half-open interval [t_start, t_end) in seconds during which one UE had no connectivity."""

    ue_id: int
    t_start: float
    t_end: float
    cause: OutageCause

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise ValueError(f"empty interval [{self.t_start}, {self.t_end})")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


@dataclass(frozen=True)
class OutageSession:
    ue_id: int
    constituents: tuple[OutageInterval, ...]
    session_class: SessionClass | None  # None when the sequence is inadmissible

    @property
    def t_start(self) -> float:
        return self.constituents[0].t_start

    @property
    def t_end(self) -> float:
        return self.constituents[-1].t_end

    @property
    def duration(self) -> float:
        return math.fsum(iv.duration for iv in self.constituents)

    @property
    def causes(self) -> tuple[OutageCause, ...]:
        return tuple(iv.cause for iv in self.constituents)


_C = OutageCause
_TERMINAL_CLASS = {
    _C.HO_SUCCESS: SessionClass.SUCCESSFUL_HO,
    _C.HO_FAILURE: SessionClass.HO_FAILURE,
    _C.RLF: SessionClass.RLF,
    _C.BFR_SUCCESS: SessionClass.BFR_SUCCESS,
    _C.SINR_DEGRADATION: SessionClass.STANDALONE_SINR,
}

# Admissible constituent orders as a DFA:
#   SINR* BFR_SUCCESS? (HO_SUCCESS | HO_FAILURE)
#   SINR* BFR_SUCCESS
#   SINR* BFR_FAILURE RLF
#   SINR+
_START, _SINR, _BFRS, _BFRF, _DONE = range(5)
_ACCEPTING = {_SINR, _BFRS, _DONE}
_TRANSITIONS = {
    _START: {_C.SINR_DEGRADATION: _SINR, _C.BFR_SUCCESS: _BFRS, _C.BFR_FAILURE: _BFRF,
             _C.HO_SUCCESS: _DONE, _C.HO_FAILURE: _DONE},
    _SINR: {_C.SINR_DEGRADATION: _SINR, _C.BFR_SUCCESS: _BFRS, _C.BFR_FAILURE: _BFRF,
            _C.HO_SUCCESS: _DONE, _C.HO_FAILURE: _DONE},
    _BFRS: {_C.HO_SUCCESS: _DONE, _C.HO_FAILURE: _DONE},
    _BFRF: {_C.RLF: _DONE},
    _DONE: {},
}


def classify_causes(causes: Sequence[OutageCause]) -> SessionClass:
    if not causes:
        raise ClassificationError("session has no constituents")
    state = _START
    for c in causes:
        nxt = _TRANSITIONS[state].get(OutageCause(c))
        if nxt is None:
            raise ClassificationError(f"inadmissible sequence: {[x.value for x in causes]}")
        state = nxt
    if state not in _ACCEPTING:
        raise ClassificationError(f"incomplete sequence: {[x.value for x in causes]}")
    return _TERMINAL_CLASS[OutageCause(causes[-1])]


def classify(session: OutageSession | Sequence[OutageInterval]) -> SessionClass:
    """Class of a session, named by its terminal constituent."""
    ivs = session.constituents if isinstance(session, OutageSession) else session
    return classify_causes([iv.cause for iv in ivs])


def _session(run: list[OutageInterval]) -> OutageSession:
    try:
        cls = classify(run)
    except ClassificationError:
        cls = None
    return OutageSession(run[0].ue_id, tuple(run), cls)


def merge_sessions(intervals: Iterable[OutageInterval], tol: float = 0.005) -> list[OutageSession]:
    """Merge each UE's intervals into maximal contiguous sessions.

    Intervals of a UE must be sorted by ``t_start`` and must not overlap by
    more than ``tol``. Consecutive intervals whose gap is at most ``tol`` join
    one session. Sessions come back ordered by (ue_id, t_start).
    """
    per_ue: dict[int, list[OutageInterval]] = defaultdict(list)
    for iv in intervals:
        per_ue[iv.ue_id].append(iv)
    sessions: list[OutageSession] = []
    for ue in sorted(per_ue):
        run: list[OutageInterval] = []
        for iv in per_ue[ue]:
            if run:
                gap = iv.t_start - run[-1].t_end
                if gap < -tol:
                    raise TraceError(f"UE {ue}: overlapping or unsorted intervals at t={iv.t_start}")
                if gap <= tol:
                    run.append(iv)
                    continue
                sessions.append(_session(run))
            run = [iv]
        if run:
            sessions.append(_session(run))
    return sessions


def split_sessions(sessions: Iterable[OutageSession]) -> list[OutageInterval]:
    return [iv for s in sessions for iv in s.constituents]


def mobility_failure_count(sessions: Iterable[OutageSession]) -> int:
    """Sessions ending in a handover failure or a radio link failure."""
    return sum(1 for s in sessions
               if s.session_class in (SessionClass.HO_FAILURE, SessionClass.RLF))
