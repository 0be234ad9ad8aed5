from __future__ import annotations

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from rhythmctl.analysis import ScenarioResult
from rhythmctl.cli import export, main, parse_config
from rhythmctl.errors import ConfigError
from rhythmctl.scenarios import Scenario, build_scenario, run_scenario

SHORT = {"schema_version": 1, "kind": "same-topology", "t_end": 10.0, "sample_stride": 100}


def _write(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# ---------------------------------------------------------------- parse_config

def test_minimal_document_uses_baseline_defaults():
    s = parse_config({"schema_version": 1, "kind": "same-topology"})
    assert isinstance(s, Scenario)
    ref = build_scenario("same-topology", {}, 0)
    assert s.to_dict() == ref.to_dict()


def test_unknown_key_is_named():
    with pytest.raises(ConfigError) as info:
        parse_config({"schema_version": 1, "kind": "same-topology", "kk": 3})
    assert info.value.path == "kk"
    assert "kk" in str(info.value)


def test_complete_sync_with_three_reference_nodes():
    with pytest.raises(ConfigError) as info:
        parse_config({"schema_version": 1, "kind": "complete-sync", "m": 3})
    assert info.value.path == "m"


def test_schema_version_required():
    with pytest.raises(ConfigError) as info:
        parse_config({"kind": "same-topology"})
    assert info.value.path == "schema_version"


def test_mapping_is_one_based():
    s = parse_config({"schema_version": 1, "kind": "complete-sync", "mapping": [1, 1, 1, 1, 1]})
    assert s.mapping.targets == (0,) * 5
    assert s.to_dict()["mapping"] == [1] * 5
    with pytest.raises(ConfigError) as info:
        parse_config({"schema_version": 1, "kind": "complete-sync", "mapping": [0, 1, 1, 1, 1]})
    assert info.value.path == "mapping"


def test_sweep_grid_keys_checked():
    with pytest.raises(ConfigError) as info:
        parse_config({"schema_version": 1, "kind": "same-topology", "grid": {"kay": [1]}}, "sweep")
    assert info.value.path == "grid.kay"


# ---------------------------------------------------------------- export

@pytest.fixture(scope="module")
def short_run():
    s = build_scenario("same-topology", {"t_end": 1.0, "sample_stride": 10}, seed=0)
    trajs, result = run_scenario(s)
    return s, trajs, result


def test_csv_shape(short_run, tmp_path):
    s, trajs, result = short_run
    export(trajs["closed_loop"], result, "csv", tmp_path, scenario=s)
    with open(tmp_path / "closed_loop.csv") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    assert len(body) == 101
    assert len(header) == 1 + 2 * 5 + 2 + 5 + 2 * 5 + 1 == 29
    assert header[0] == "t" and header[-1] == "ce2"
    assert all(len(r) == 29 for r in body)


def test_json_summary_round_trip(short_run, tmp_path):
    s, trajs, result = short_run
    export(trajs["closed_loop"], result, "json", tmp_path, scenario=s)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert ScenarioResult.from_dict(summary["result"]) == result
    assert summary["seed"] == 0
    assert summary["scenario"]["parameters"]["alpha_r"] == 0.52
    table = json.loads((tmp_path / "closed_loop.json").read_text())
    assert np.array(table["rows"]).shape == (101, 29)


def test_plot_emits_three_svgs(short_run, tmp_path):
    s, trajs, result = short_run
    export(trajs["closed_loop"], result, "csv", tmp_path, scenario=s, trajectories=trajs, plot=True)
    svgs = sorted(p.name for p in tmp_path.glob("*.svg"))
    assert svgs == ["ce2.svg", "couplings.svg", "response.svg"]
    assert (tmp_path / "ce2.svg").read_text().startswith("<svg")


# ---------------------------------------------------------------- main

def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "usage" in capsys.readouterr().out


def test_missing_config_file(tmp_path):
    assert main(["run-scenario", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == 2


def test_missing_config_flag(tmp_path):
    assert main(["run-scenario", "--out", str(tmp_path)]) == 2


def test_schema_violation_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, {**SHORT, "kk": 1})
    assert main(["run-scenario", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    assert "kk" in capsys.readouterr().err


def test_unwritable_output_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = _write(tmp_path, SHORT)
    assert main(["run-scenario", "--config", cfg, "--out", str(blocker / "sub")]) == 3


def test_numerical_failure_exit_code(tmp_path):
    doc = {"schema_version": 1, "adjacency": [[1.0]], "alpha": 0.5, "initial": [1e308, 1e308],
           "dt": 1.0, "t_end": 5.0}
    cfg = _write(tmp_path, doc)
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 4


def test_run_scenario_end_to_end(tmp_path):
    cfg = _write(tmp_path, SHORT)
    out = tmp_path / "out"
    assert main(["run-scenario", "--config", cfg, "--out", str(out), "--plot"]) == 0
    assert (out / "closed_loop.csv").exists() and (out / "summary.json").exists()
    assert len(list(out.glob("*.svg"))) >= 3


def test_output_dir_from_environment(tmp_path, monkeypatch):
    cfg = _write(tmp_path, SHORT)
    monkeypatch.setenv("RHYTHMCTL_OUT", str(tmp_path / "env_out"))
    assert main(["run-scenario", "--config", cfg]) == 0
    assert (tmp_path / "env_out" / "summary.json").exists()


def test_seed_override(tmp_path):
    cfg = _write(tmp_path, SHORT)
    assert main(["run-scenario", "--config", cfg, "--out", str(tmp_path / "a"), "--seed", "7"]) == 0
    assert json.loads((tmp_path / "a" / "summary.json").read_text())["seed"] == 7


def test_design_and_simulate_commands(tmp_path):
    design = _write(tmp_path, {"schema_version": 1, "rho": [1.0, 0.6, 0.4], "theta": [0.0, 1.0, 2.5],
                               "mu1": 1.0, "mu1_imag": 0.3}, "design.json")
    assert main(["design", "--config", design, "--out", str(tmp_path / "d")]) == 0
    summary = json.loads((tmp_path / "d" / "summary.json").read_text())
    assert summary["leading_kind"] == "complex-conjugate-pair"
    assert summary["hopf_alpha"] == pytest.approx(0.51)
    sim = _write(tmp_path, {"schema_version": 1, "adjacency_csv": str(tmp_path / "d" / "adjacency.csv"),
                            "alpha": 0.52, "t_end": 20.0, "dt": 0.01}, "sim.json")
    assert main(["simulate", "--config", sim, "--out", str(tmp_path / "s")]) == 0
    with open(tmp_path / "s" / "trajectory.csv") as fh:
        header = next(csv.reader(fh))
    assert header == ["t", "x_1", "x_2", "x_3", "y_1", "y_2", "y_3"]


def test_sweep_parallel_matches_serial(tmp_path):
    doc = {**SHORT, "t_end": 2.0, "seeds": [0, 1], "grid": {"k": [50.0, 100.0]}}
    del doc["kind"]
    doc["kind"] = "same-topology"
    cfg = _write(tmp_path, doc)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "serial")]) == 0
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "par"), "--jobs", "2"]) == 0
    a = (tmp_path / "serial" / "sweep.json").read_bytes()
    assert a == (tmp_path / "par" / "sweep.json").read_bytes()
    assert len(json.loads(a)["runs"]) == 4


def test_byte_identical_outputs(tmp_path):
    cfg = _write(tmp_path, {**SHORT, "kind": "different-topology"})
    for name in ("a", "b"):
        assert main(["run-scenario", "--config", cfg, "--out", str(tmp_path / name), "--plot"]) == 0
    for f in ("closed_loop.csv", "summary.json", "response.svg", "ce2.svg", "couplings.svg"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rhythmctl", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "run-scenario" in proc.stdout
