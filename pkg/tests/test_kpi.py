import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import mot_oracle, random_trace
from mobrel.config import ScenarioConfig
from mobrel.kpi import (NO_OUTAGE, NoOutageSessions, compute_report, mobility_rates, mot, mtbo,
                        outage_percentage)
from mobrel.outage import OutageCause as C, OutageInterval as I, merge_sessions


def sessions_of(durations, gap=5.0):
    t, ivs = 0.0, []
    for d in durations:
        ivs.append(I(0, t, t + d, C.SINR_DEGRADATION))
        t += d + gap
    return merge_sessions(ivs)


def test_outage_percentage_examples():
    total, per = outage_percentage([I(0, 0.0, 1.0, C.RLF)], 1, 100.0)
    assert total == pytest.approx(1.0) and per[C.RLF] == pytest.approx(1.0)
    assert outage_percentage([], 10, 30.0)[0] == 0.0
    total, _ = outage_percentage([I(u, 0.0, 3.0, C.HO_SUCCESS) for u in range(10)], 10, 30.0)
    assert total == pytest.approx(10.0)


def test_outage_percentage_rejects_bad_denominator():
    with pytest.raises(ValueError):
        outage_percentage([], 0, 30.0)


def test_mtbo_examples():
    assert mtbo(sessions_of([1.0, 1.0]), 1, 10.0) == pytest.approx(4.0)
    (s,) = merge_sessions([I(0, 0.0, 30.0, C.SINR_DEGRADATION)])
    assert mtbo([s], 1, 30.0) == 0.0


def test_mot_examples():
    assert mot(sessions_of([1.0, 1.0])) == pytest.approx(1.0)
    assert mot(sessions_of([0.055, 0.380])) == pytest.approx(0.2175)


def test_empty_session_set():
    with pytest.raises(NoOutageSessions):
        mot([])
    with pytest.raises(NoOutageSessions):
        mtbo([], 1, 1.0)


def test_mobility_rate_example():
    # 4053 events across 420 UEs over 30 s
    assert mobility_rates({"ho": 4053}, 420, 30.0)["ho"] == pytest.approx(19.3)
    with pytest.raises(ValueError):
        mobility_rates({}, 1, 0.0)


def test_report_without_sessions():
    r = compute_report([], ScenarioConfig(n_ue=3, sim_time=1.0), "x")
    assert r.mot is None and r.mtbo is None and r.kpi_status == NO_OUTAGE
    assert r.total_outage_pct == 0.0 and r.n_sessions == 0


def test_report_fields():
    cfg = ScenarioConfig(n_ue=2, sim_time=10.0)
    ivs = [I(0, 1.0, 1.055, C.HO_SUCCESS), I(1, 2.0, 2.1, C.BFR_FAILURE), I(1, 2.1, 2.28, C.RLF),
           I(1, 5.0, 5.38, C.HO_FAILURE)]
    r = compute_report(ivs, cfg, "demo")
    assert r.n_sessions == 3 and r.n_ho_success == 1 and r.n_mobility_failures == 2
    assert r.ho_success_rate == pytest.approx(1 / (2 * 10 / 60))
    assert r.mobility_failure_rate == pytest.approx(2 / (2 * 10 / 60))
    assert r.mot == pytest.approx((0.055 + 0.28 + 0.38) / 3)
    assert r.mdt == r.mot and r.mtbf == r.mtbo
    assert sum(r.outage_pct_by_component.values()) == pytest.approx(r.total_outage_pct)
    assert r.config_hash == cfg.config_hash()


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_kpi_identities(seed):
    cfg = ScenarioConfig(n_ue=3, sim_time=30.0)
    ivs = random_trace(np.random.default_rng(seed), cfg.contiguity_tol, n_ue=3)
    r = compute_report(ivs, cfg)
    if r.n_sessions == 0:
        assert r.kpi_status == NO_OUTAGE
        return
    nt = cfg.n_ue * cfg.sim_time
    assert math.isclose(r.mot + r.mtbo, nt / r.n_sessions, rel_tol=1e-9)
    assert math.isclose(r.total_outage_pct, 100 * r.mot * r.n_sessions / nt, rel_tol=1e-9)
    assert math.isclose(r.mot, mot_oracle(ivs, cfg.contiguity_tol), rel_tol=1e-12)
