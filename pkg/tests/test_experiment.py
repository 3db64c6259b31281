import csv
import json

import pytest

from mobrel.cli import main
from mobrel.config import ScenarioConfig
from mobrel.experiment import (KPI_COLUMNS, ReportError, emit_report, expand_sweep, read_trace,
                               run_experiment, verify_report)

BASE = ScenarioConfig(n_ue=4, sim_time=1.0, seed=11)


@pytest.fixture(scope="module")
def two_reports():
    return run_experiment(BASE, [(60, False), (120, False)], 1)


def test_seed_schedule():
    jobs = expand_sweep(BASE, [(60, False)], 3)
    assert [c.seed for _, c in jobs] == [11, 12, 13]
    assert [n for n, _ in jobs] == ["v60_free_r0", "v60_free_r1", "v60_free_r2"]


def test_sweep_points_share_the_seed(two_reports):
    assert [r.seed for r in two_reports] == [11, 11]
    assert [r.speed_kmh for r in two_reports] == [60.0, 120.0]
    assert two_reports[0].config_hash != two_reports[1].config_hash


def test_bad_replications():
    with pytest.raises(ValueError):
        expand_sweep(BASE, [(60, False)], 0)


def test_kpi_csv_shape(tmp_path, two_reports):
    emit_report(two_reports, tmp_path)
    rows = list(csv.reader(open(tmp_path / "kpi.csv")))
    assert rows[0] == KPI_COLUMNS
    assert len(rows) == 3
    doc = json.loads((tmp_path / "kpi.json").read_text())
    assert len(doc["reports"]) == 2 and "config" in doc["reports"][0]


def test_emission_is_byte_identical(tmp_path, two_reports):
    emit_report(two_reports, tmp_path / "a", trace=True)
    emit_report(two_reports, tmp_path / "b", trace=True)
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_refuses_overwrite(tmp_path, two_reports):
    emit_report(two_reports, tmp_path)
    with pytest.raises(ReportError):
        emit_report(two_reports, tmp_path)
    emit_report(two_reports, tmp_path, force=True)


def test_one_ue_trace_rows_equal_intervals(tmp_path):
    cfg = ScenarioConfig(n_ue=1, sim_time=5.0, ue_speed=120.0, seed=2)
    (r,) = run_experiment(cfg, [(120, False)], 1)
    emit_report([r], tmp_path, trace=True)
    trace = read_trace(tmp_path / "trace_v120_free_r0.csv")
    assert len(trace) == r.n_intervals == len(r.intervals)
    assert trace == r.intervals


def test_verify_round_trip_and_tamper(tmp_path, two_reports):
    emit_report(two_reports, tmp_path, trace=True)
    assert verify_report(tmp_path) == []
    path = tmp_path / "trace_v60_free_r0.csv"
    lines = path.read_text().splitlines(keepends=True)
    if len(lines) > 1:
        path.write_text("".join(lines[:-1]))
        assert verify_report(tmp_path) != []


def test_verify_needs_traces(tmp_path, two_reports):
    emit_report(two_reports, tmp_path)
    with pytest.raises(ReportError):
        verify_report(tmp_path)


def test_cli_simulate_and_verify(tmp_path, capsys):
    conf = tmp_path / "c.ini"
    conf.write_text("n_ue = 3\nsim_time = 1\nseed = 5\n")
    out = tmp_path / "out"
    rc = main(["simulate", "--config", str(conf), "--out", str(out), "--speeds", "60",
               "--blockage", "both", "--reps", "2", "--trace"])
    assert rc == 0
    rows = list(csv.reader(open(out / "kpi.csv")))
    assert [r[0] for r in rows[1:]] == ["v60_free_r0", "v60_free_r1", "v60_blocked_r0",
                                        "v60_blocked_r1"]
    assert main(["verify", "--report", str(out)]) == 0
    # second run without --force fails cleanly
    assert main(["simulate", "--config", str(conf), "--out", str(out), "--speeds", "60"]) == 1


def test_cli_config_errors(tmp_path, capsys):
    conf = tmp_path / "bad.ini"
    conf.write_text("tick = 0.015\n")
    assert main(["simulate", "--config", str(conf), "--out", str(tmp_path / "o")]) == 2
    assert "tick must divide ssb_period" in capsys.readouterr().err


def test_cli_missing_report(tmp_path):
    assert main(["verify", "--report", str(tmp_path / "none")]) == 1


def test_cli_dump_shadow(tmp_path):
    conf = tmp_path / "c.ini"
    conf.write_text("n_ue = 1\nsim_time = 0.1\n")
    assert main(["simulate", "--config", str(conf), "--out", str(tmp_path / "o"), "--speeds", "30",
                 "--dump-shadow"]) == 0
    assert len(list((tmp_path / "o" / "shadow").glob("shadow_*.csv"))) == 21
