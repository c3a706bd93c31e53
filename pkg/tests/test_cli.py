import csv
import json
import subprocess
import sys

import jsonschema
import pytest

from landau_hall import cli
from landau_hall.config import SCENARIOS, ConfigError, build, default_config_path, load


def run(argv):
    return cli.main(argv)


def read_json(path):
    return json.loads(path.read_text())


@pytest.mark.parametrize("scenario", sorted(SCENARIOS.values()))
def test_shipped_configs_parse(scenario):
    cfg = load(default_config_path(scenario), scenario)
    assert cfg.scenario == scenario


def test_fourier_end_to_end(tmp_path):
    assert run(["fourier", "--out", str(tmp_path), "--quiet"]) == 0
    summary = read_json(tmp_path / "summary.json")
    jsonschema.validate(summary, cli.summary_schema())
    assert summary["status"] == "pass" and summary["schema_version"] == cli.SCHEMA_VERSION
    assert len(summary["assertions"]) == 12
    rows = list(csv.DictReader((tmp_path / "fourier.csv").open()))
    assert len(rows) == 12 and set(rows[0]) == {"n", "a", "residual"}
    plots = read_json(tmp_path / "plots.json")
    assert plots["plots"][0]["file"] == "fourier.csv"


def test_resistivity_end_to_end(tmp_path):
    assert run(["resistivity", "--out", str(tmp_path), "--quiet"]) == 0
    summary = read_json(tmp_path / "summary.json")
    jsonschema.validate(summary, cli.summary_schema())
    assert summary["integers"] == {"l": [1, 2, 3, 4, 5], "k": [1, 1, 1, 1, 1]}
    rows = list(csv.DictReader((tmp_path / "resistivity.csv").open()))
    for row in rows[:5]:
        assert abs(float(row["rho_over_klitzing"]) - float(row["l"])) < 1e-9
    assert {"l", "delta_x", "delta_y", "rho_over_klitzing"} <= set(rows[0])


def test_verify_end_to_end_and_manifest_rerun(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert run(["verify", "--out", str(first), "--quiet", "--grid", "128x128"]) == 0
    summary = read_json(first / "summary.json")
    jsonschema.validate(summary, cli.summary_schema())
    assert summary["results"]["max_residual"] < 1e-5
    manifest = read_json(first / "manifest.json")
    assert manifest["config"]["grid"] == {"nx": 128, "ny": 128}
    assert run(["verify", "--config", str(first / "manifest.json"), "--out", str(second), "--quiet"]) == 0
    assert (first / "summary.json").read_bytes() == (second / "summary.json").read_bytes()


def test_tolerance_override_can_fail_a_run(tmp_path, capsys):
    assert run(["fourier", "--out", str(tmp_path), "--tolerance", "1e-30"]) == 1
    assert read_json(tmp_path / "summary.json")["status"] == "fail"
    assert "FAIL" in capsys.readouterr().out


def test_unknown_key_is_a_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('scenario = "fourier-check"\n[fourier]\norderz = [1]\n')
    assert run(["fourier", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert "orderz" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


@pytest.mark.parametrize("text,needle", [
    ('[paramz]\nmass = 1\n', "paramz"),
    ('[params]\nmass = "heavy"\n', "params.mass"),
    ('[tolerances]\nfourier = -1.0\n', "tolerances.fourier"),
    ('scenario = "verify-solutions"\n', "scenario"),
    ('[params]\nfield_B = 0.0\n', "B = 0"),
    ('this is not toml', "invalid TOML"),
])
def test_config_errors_name_the_problem(tmp_path, capsys, text, needle):
    bad = tmp_path / "bad.toml"
    bad.write_text(text)
    assert run(["fourier", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert needle in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert run(["fourier", "--config", str(tmp_path / "nope.toml")]) == 2


def test_bad_grid_flag(tmp_path):
    with pytest.raises(SystemExit):
        run(["fourier", "--grid", "big"])
    assert run(["fourier", "--grid", "8x8", "--out", str(tmp_path)]) == 2


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["fourier", "--out", str(blocker / "sub"), "--quiet"]) == 3


def test_env_var_sets_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path))
    assert run(["fourier", "--quiet"]) == 0
    assert (tmp_path / "fourier-check" / "summary.json").exists()


def test_build_fills_defaults():
    cfg = build({"scenario": "fourier-check"})
    assert cfg["params"]["field_B"] == 1.0 and cfg.tolerances["fourier"] == 1e-6
    with pytest.raises(ConfigError):
        build({})
    with pytest.raises(ConfigError):
        build({"scenario": "fourier-check"}, "verify-solutions")
    with pytest.raises(ConfigError):
        build({"scenario": "x"})
    with pytest.raises(ConfigError):
        build({"scenario": "general-solution", "general": {"c": [[0, 1, 0]]}})


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "landau_hall.cli", "fourier", "--out", str(tmp_path), "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
