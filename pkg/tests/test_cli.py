"""Command-line entry point and the bundled scenario files."""

import json
import os

import pytest

from tclkraus.cli import main

SCENARIO_DIR = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def write_scenario(tmp_path, data, name="s.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def cheap_scenario(**overrides):
    data = {
        "system": {"preset": "qubit_sigmaz", "epsilon0": 1.0},
        "generators": [{"preset": "sigma_z"}],
        "bath": {"model": "markovian", "gamma": 0.4},
        "grid": {"t_max": 1.0, "n_points": 5},
        "initial_state": {"preset": "plus"},
        "runs": ["tcl2", "lindblad"],
        "tolerances": {"tcl2_vs_lindblad": 1e-8},
    }
    data.update(overrides)
    return data


def test_missing_scenario_flag():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_unreadable_scenario(tmp_path, capsys):
    assert main(["--scenario", str(tmp_path / "nope.json")]) == 2
    assert "error:" in capsys.readouterr().err


def test_invalid_json_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{]")
    assert main(["--scenario", str(path)]) == 2
    assert "not valid JSON" in capsys.readouterr().err


def test_validation_error_exits_2(tmp_path, capsys):
    data = cheap_scenario()
    data["runs"] = ["tcl2", "oracle"]
    del data["tolerances"]
    assert main(["--scenario", write_scenario(tmp_path, data)]) == 2
    assert "oracle" in capsys.readouterr().err


def test_pass_run_exit_0(tmp_path, capsys):
    path = write_scenario(tmp_path, cheap_scenario())
    out = str(tmp_path / "out")
    assert main(["--scenario", path, "--out", out]) == 0
    stdout = capsys.readouterr().out
    assert "gate tcl2_vs_lindblad: PASS" in stdout
    assert os.path.exists(os.path.join(out, "report.json"))


def test_quiet_suppresses_stdout(tmp_path, capsys):
    path = write_scenario(tmp_path, cheap_scenario())
    assert main(["--scenario", path, "--out", str(tmp_path / "o"), "--quiet"]) == 0
    assert capsys.readouterr().out == ""


def test_gate_failure_exit_1(tmp_path, capsys):
    data = cheap_scenario(runs=["tcl2", "dephasing"],
                          tolerances={"tcl2_vs_dephasing": 1e-6},
                          grid={"t_max": 2.0, "n_points": 5})
    path = write_scenario(tmp_path, data)
    assert main(["--scenario", path, "--out", str(tmp_path / "o")]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_only_subset(tmp_path, capsys):
    path = write_scenario(tmp_path, cheap_scenario())
    # gated metric needs both runs; restricting to one must fail the gate
    assert main(["--scenario", path, "--out", str(tmp_path / "o"),
                 "--only", "tcl2", "--quiet"]) == 1
    # unknown run in --only is a usage error
    assert main(["--scenario", path, "--out", str(tmp_path / "o2"),
                 "--only", "kraus"]) == 2
    assert "--only" in capsys.readouterr().err
    # empty list is a usage error too
    assert main(["--scenario", path, "--only", ","]) == 2


@pytest.mark.parametrize("name", ["dephasing_singlemode", "markov_limit",
                                  "zero_coupling", "weak_coupling_2mode"])
def test_bundled_scenarios_pass(tmp_path, name):
    path = os.path.join(SCENARIO_DIR, name + ".json")
    out = str(tmp_path / name)
    assert main(["--scenario", path, "--out", out, "--quiet"]) == 0
    report = json.loads(open(os.path.join(out, "report.json")).read())
    assert report["gates"] and all(g["pass"] for g in report["gates"].values())
