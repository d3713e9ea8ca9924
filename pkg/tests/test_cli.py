"""Tests for the command-line interface: dispatch, serialization, exit codes."""

import csv
import io
import json
import math

import pytest

from movingcavity.cli import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_VALIDATION,
    ConfigError,
    load_config,
    main,
)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(tmp_path, **fields):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(fields), encoding="utf-8")
    return str(path)


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# configuration handling


def test_defaults_without_config_file():
    config = load_config(None, {})
    assert config.scenario == "dce-i"
    assert config.length == pytest.approx(math.pi)


def test_unknown_field_is_named():
    with pytest.raises(ConfigError) as err:
        load_config(None, {"wavelenght": 3})
    assert "wavelenght" in str(err.value)


def test_bad_value_names_field():
    with pytest.raises(ConfigError) as err:
        load_config(None, {"epsilon": "tiny"})
    assert "epsilon" in str(err.value)


def test_disordered_window_rejected():
    with pytest.raises(ConfigError) as err:
        load_config(None, {"t0": 5.0, "tf": 1.0})
    assert "window" in str(err.value)


def test_malformed_json_exits_with_config_code(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    code, _, err = run_cli(capsys, "spectrum", "--config", str(path))
    assert code == EXIT_CONFIG
    assert "config error" in err


# ---------------------------------------------------------------------------
# spectrum


def test_spectrum_integer_frequencies(capsys):
    code, out, _ = run_cli(capsys, "spectrum")
    assert code == EXIT_OK
    header, rows = parse_csv(out)
    assert header == ["index_0", "wavenumber_0", "frequency"]
    assert [float(r[2]) for r in rows] == pytest.approx([1, 2, 3, 4, 5])


def test_spectrum_box_single_mode(tmp_path, capsys):
    config = write_config(
        tmp_path, scenario="gw-rigid", lx=math.pi, ly=math.pi, lz=math.pi,
        frequency_cutoff=2.0,
    )
    code, out, _ = run_cli(
        capsys, "spectrum", "--config", config, "--format", "json"
    )
    assert code == EXIT_OK
    document = json.loads(out)
    assert len(document["data"]) == 1
    assert document["data"][0][-1] == pytest.approx(math.sqrt(3.0))


def test_spectrum_json_meta_echoes_resolved_config(capsys):
    code, out, _ = run_cli(capsys, "spectrum", "--format", "json")
    document = json.loads(out)
    assert document["meta"]["scenario"] == "dce-i"
    assert document["meta"]["bands"] == 5
    assert document["meta"]["bc"] == "dirichlet"


# ---------------------------------------------------------------------------
# resonances


def test_resonances_resonant_drive(capsys):
    code, out, _ = run_cli(capsys, "resonances")
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    pairs = {(int(r[0]), int(r[1])) for r in rows if r[2] == "pair-creation"}
    assert (0, 1) in pairs


def test_resonances_irrational_drive_empty(tmp_path, capsys):
    config = write_config(tmp_path, omega_drive=math.sqrt(2), tolerance=1e-9)
    code, out, _ = run_cli(capsys, "resonances", "--config", config)
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    assert rows == []


def test_resonances_loose_tolerance_reports_detuning(tmp_path, capsys):
    config = write_config(tmp_path, omega_drive=3.2, tolerance=0.5)
    code, out, _ = run_cli(capsys, "resonances", "--config", config)
    _, rows = parse_csv(out)
    assert rows
    assert any(abs(float(r[3])) > 1e-3 for r in rows)


# ---------------------------------------------------------------------------
# perturbative evolution


def test_evolve_zero_epsilon_trivial(tmp_path, capsys):
    config = write_config(tmp_path, epsilon=0.0, samples=3, bands=3)
    code, out, _ = run_cli(capsys, "evolve", "--config", config)
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    for row in rows:
        t, n, m = float(row[0]), int(row[1]), int(row[2])
        assert float(row[3]) == (1.0 if n == m else 0.0)
        assert float(row[5]) == 0.0


def test_evolve_resonant_growth_is_linear(tmp_path, capsys):
    config = write_config(
        tmp_path, samples=10, tf=40.0, bands=4, pairs=[[0, 1]]
    )
    code, out, _ = run_cli(capsys, "evolve", "--config", config)
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    times = [float(r[0]) for r in rows]
    betas = [float(r[5]) for r in rows]
    # after the transient, |beta_12| grows linearly with the window length
    rate = (betas[-1] - betas[4]) / (times[-1] - times[4])
    for t, b in zip(times[4:], betas[4:]):
        assert b == pytest.approx(betas[4] + rate * (t - times[4]), rel=0.02)


def test_evolve_off_resonant_bounded(tmp_path, capsys):
    config = write_config(
        tmp_path, omega_drive=2.6, samples=20, tf=60.0, bands=4,
        pairs=[[0, 1]],
    )
    code, out, _ = run_cli(capsys, "evolve", "--config", config)
    _, rows = parse_csv(out)
    betas = [float(r[5]) for r in rows]
    assert max(betas[10:]) < 2.0 * max(betas[:10])


# ---------------------------------------------------------------------------
# exact evolution


def test_evolve_exact_static_is_pure_phase(tmp_path, capsys):
    config = write_config(
        tmp_path, epsilon=0.0, tf=1.0, samples=2, bands=3
    )
    code, out, _ = run_cli(capsys, "evolve-exact", "--config", config)
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    final_t = max(float(r[0]) for r in rows)
    for row in rows:
        if float(row[0]) != final_t:
            continue
        i, j = int(row[1]), int(row[2])
        magnitude = abs(complex(float(row[3]), float(row[4])))
        assert float(row[5]) < 1e-6
        if i == j:
            assert magnitude == pytest.approx(1.0, abs=1e-6)
        else:
            assert magnitude < 1e-6


def test_evolve_exact_rejects_box_scenario(tmp_path, capsys):
    config = write_config(tmp_path, scenario="gw-rigid")
    code, _, err = run_cli(capsys, "evolve-exact", "--config", config)
    assert code == EXIT_CONFIG
    assert "scenario" in err


def test_evolve_exact_oversized_step_exit_code(tmp_path, capsys):
    config = write_config(tmp_path, tf=2.0, bands=3, dt=1.0)
    code, _, err = run_cli(capsys, "evolve-exact", "--config", config)
    assert code == EXIT_NUMERICAL
    assert "dt" in err


# ---------------------------------------------------------------------------
# validation


def test_validate_default_passes(capsys):
    code, out, _ = run_cli(capsys, "validate", "--format", "json")
    assert code == EXIT_OK
    document = json.loads(out)
    checks = {row[0]: row[1] for row in document["data"]}
    assert set(checks) == {
        "dce-closed-form", "gw-closed-form", "orthonormality",
        "static-generator",
    }
    assert all(passed == 1 for passed in checks.values())


def test_validate_injected_error_fails_named_check(tmp_path, capsys):
    config = write_config(tmp_path, inject_error="dce-closed-form")
    code, out, _ = run_cli(capsys, "validate", "--config", config)
    assert code == EXIT_VALIDATION
    _, rows = parse_csv(out)
    status = {row[0]: int(row[1]) for row in rows}
    assert status["dce-closed-form"] == 0
    assert status["orthonormality"] == 1


def test_validate_unknown_injected_check(tmp_path, capsys):
    config = write_config(tmp_path, inject_error="no-such-check")
    code, _, err = run_cli(capsys, "validate", "--config", config)
    assert code == EXIT_CONFIG
    assert "inject_error" in err


def test_validate_epsilon_sweep_slope(tmp_path, capsys):
    config = write_config(
        tmp_path, mode="epsilon-sweep", bands=3, duration=4.0,
        epsilons=[1e-2, 1e-3],
    )
    code, out, _ = run_cli(capsys, "validate", "--config", config)
    assert code == EXIT_OK
    _, rows = parse_csv(out)
    slope = float(rows[0][2])
    assert abs(slope - 2.0) < 0.3


# ---------------------------------------------------------------------------
# serialization invariants


def test_csv_output_is_deterministic(tmp_path, capsys):
    config = write_config(tmp_path, samples=3, bands=3, tf=2.0)
    _, first, _ = run_cli(capsys, "evolve", "--config", config)
    _, second, _ = run_cli(capsys, "evolve", "--config", config)
    assert first == second


def test_json_round_trips(tmp_path, capsys):
    out_path = tmp_path / "table.json"
    config = write_config(tmp_path, samples=2, bands=3, tf=1.0)
    code, _, _ = run_cli(
        capsys, "evolve", "--config", config,
        "--output", str(out_path), "--format", "json",
    )
    assert code == EXIT_OK
    document = json.loads(out_path.read_text(encoding="utf-8"))
    assert set(document) == {"meta", "columns", "data"}
    assert all(len(row) == len(document["columns"]) for row in document["data"])
    assert json.loads(json.dumps(document)) == document


def test_output_file_writing(tmp_path, capsys):
    out_path = tmp_path / "spectrum.csv"
    code, out, _ = run_cli(capsys, "spectrum", "--output", str(out_path))
    assert code == EXIT_OK
    assert out == ""
    header, rows = parse_csv(out_path.read_text(encoding="utf-8"))
    assert header[-1] == "frequency"
    assert len(rows) == 5
