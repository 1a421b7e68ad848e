"""Command-line interface: exit codes, outputs, determinism."""

import csv
import json

import pytest

from captrack.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_TRACE, main
from captrack.harvest import load_harvest_csv, load_irradiance_csv


def test_gen_kinetic_writes_calibrated_trace(tmp_path, capsys):
    out = tmp_path / "kinetic.csv"
    assert main(["gen-kinetic", "--out", str(out), "--days", "2"]) == EXIT_OK
    trace = load_harvest_csv(str(out))
    assert len(trace) == 2 * 1440
    for day in range(2):
        chunk = trace.kinetic_a[day * 1440 : (day + 1) * 1440]
        assert float(chunk.sum()) * 60.0 * 3.3 == pytest.approx(13.07, rel=1e-9)
    assert trace.solar_a.max() == 0.0
    assert "13.07" in capsys.readouterr().out

    # Same seed, same bytes.
    again = tmp_path / "kinetic2.csv"
    assert main(["gen-kinetic", "--out", str(again), "--days", "2"]) == EXIT_OK
    assert again.read_bytes() == out.read_bytes()


def test_gen_kinetic_rejects_bad_weights(tmp_path, capsys):
    out = tmp_path / "k.csv"
    code = main(["gen-kinetic", "--out", str(out), "--weights", "0.5,0.5,0.5,0.5"])
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_gen_solar_and_days_guard(tmp_path, capsys):
    out = tmp_path / "sun.csv"
    assert main(["gen-solar", "--out", str(out), "--days", "1"]) == EXIT_OK
    trace = load_irradiance_csv(str(out))
    assert trace.samples.size == 1440
    assert "insolation" in capsys.readouterr().out

    assert main(["gen-solar", "--out", str(out), "--days", "0"]) == EXIT_CONFIG


def test_simulate_missing_trace(tmp_path, capsys):
    code = main(["simulate", "--trace", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "out")])
    assert code == EXIT_TRACE
    assert "trace error" in capsys.readouterr().err


def test_simulate_builtin_day(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["simulate", "--out", str(out), "--days", "1"]) == EXIT_OK
    for name in ("timeseries.csv", "metrics.json", "ledger.json"):
        assert (out / name).exists()
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["total_fixes"] == 720
    assert metrics["depletion_count"] == 0
    ledger = json.loads((out / "ledger.json").read_text())
    assert abs(ledger["closure_error_j"]) < 1e-6
    assert "720 fixes" in capsys.readouterr().out


def test_simulate_with_irradiance_trace(tmp_path):
    sun = tmp_path / "sun.csv"
    assert main(["gen-solar", "--out", str(sun), "--days", "1"]) == EXIT_OK
    out = tmp_path / "run"
    assert main(["simulate", "--trace", str(sun), "--out", str(out)]) == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["total_fixes"] > 0


def test_simulate_invalid_config(tmp_path, capsys):
    config = tmp_path / "config.yaml"
    config.write_text("intervals:\n  fix_s: 90\n")
    code = main(["simulate", "--config", str(config), "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "config error" in err and "fix" in err


def test_simulate_blocked_output(tmp_path, capsys):
    blocker = tmp_path / "out"
    blocker.write_text("in the way")
    code = main(["simulate", "--out", str(blocker), "--days", "1"])
    assert code == EXIT_IO
    assert "i/o error" in capsys.readouterr().err


def test_sweep_grid(tmp_path, capsys):
    spec = tmp_path / "sweep.yaml"
    spec.write_text("capacitors: [2.5, 5.0]\nfix_intervals_s: [120, 300]\ngenerate: {days: 1}\n")
    out = tmp_path / "grid"
    assert main(["sweep", "--spec", str(spec), "--out", str(out)]) == EXIT_OK

    with open(out / "comparison.csv", newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 4
    assert {(r["capacitance_f"], r["fix_interval_s"]) for r in rows} == {
        ("2.5", "120"), ("2.5", "300"), ("5", "120"), ("5", "300"),
    }
    for row in rows:
        parts = sum(int(row[k]) for k in ("hot_fixes", "hot_ephemeris", "warm_ephemeris", "cold_starts"))
        assert parts == int(row["total_fixes"])
        cell = out / f"c{row['capacitance_f']}F_i{row['fix_interval_s']}s"
        assert (cell / "metrics.json").exists()
    # Denser schedule fixes more.
    by_cell = {(r["capacitance_f"], r["fix_interval_s"]): int(r["total_fixes"]) for r in rows}
    assert by_cell[("2.5", "120")] > by_cell[("2.5", "300")]
    assert "comparison table" in capsys.readouterr().out


def test_sweep_is_deterministic(tmp_path):
    spec = tmp_path / "sweep.yaml"
    spec.write_text("capacitors: [2.5]\nfix_intervals_s: [300]\ngenerate: {days: 1}\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--spec", str(spec), "--out", str(a)]) == EXIT_OK
    assert main(["sweep", "--spec", str(spec), "--out", str(b)]) == EXIT_OK
    assert (a / "comparison.csv").read_bytes() == (b / "comparison.csv").read_bytes()
    cell = "c2.5F_i300s"
    assert (a / cell / "timeseries.csv").read_bytes() == (b / cell / "timeseries.csv").read_bytes()


def test_sweep_bad_spec(tmp_path, capsys):
    spec = tmp_path / "sweep.yaml"
    spec.write_text("capacitors: [2.5]\nfix_intervals_s: [90]\n")
    code = main(["sweep", "--spec", str(spec), "--out", str(tmp_path / "grid")])
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    assert not (tmp_path / "grid").exists()  # nothing ran
