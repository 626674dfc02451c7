import csv
import json
import subprocess
import sys

import pytest

from hybrid_uniting.arcio import arc_from_csv
from hybrid_uniting.cli import grid_points, main
from hybrid_uniting.errors import InvalidConfig
from hybrid_uniting.scenario import apply_overrides, config_from_dict, load_config, preset_config, validate
from hybrid_uniting.supervisor import SupervisedLayout, switching_census


def simulate(tmp_path, *extra):
    out = tmp_path / "run"
    code = main(["simulate", "--out", str(out), *extra])
    return code, out


def test_simulate_fig_a_outputs(tmp_path):
    code, out = simulate(tmp_path, "--preset", "ex1-figA")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    downs = [s for s in summary["switch_times"] if s[2] == 1 and s[3] == 0]
    assert len(downs) == 1 and 4.4 <= downs[0][0] <= 4.8
    assert summary["termination"] == "Converged"
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == "t,j,xi0,xi1,z0,z1,q,tau"


def test_simulate_dwell_dominates(tmp_path):
    code, out = simulate(tmp_path, "--preset", "ex1-figA", "--param", "tau_star=10", "--param", "max_t=30")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    first = next(s for s in summary["switch_times"] if s[3] == 0)
    assert first[0] == pytest.approx(10.0, abs=0.02)


def test_malformed_config_names_field(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"example": "ex1", "params": {"alpha_bar": 0.9}}))
    code, out = simulate(tmp_path, "--config", str(cfg))
    assert code == 2
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "InvalidConfig" and err["field"] == "params.alpha_bar"
    cfg.write_text("{not json")
    assert simulate(tmp_path, "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps({"example": "ex1", "solver": {"dt": -1}}))
    code, out = simulate(tmp_path, "--config", str(cfg))
    assert code == 2 and json.loads((out / "error.json").read_text())["field"] == "solver.dt"


def test_unknown_override_rejected():
    with pytest.raises(InvalidConfig) as err:
        apply_overrides(preset_config("ex1-figA"), ["nonsense=1"])
    assert err.value.field == "params.nonsense"


def test_config_round_trip(tmp_path):
    cfg = preset_config("ex2-above")
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    back = load_config(p)
    assert back.to_dict() == cfg.to_dict()
    validate(config_from_dict(cfg.to_dict()))


def test_design_pass_and_fail(tmp_path):
    assert main(["design", "--out", str(tmp_path / "a")]) == 0
    rep = json.loads((tmp_path / "a" / "design_report.json").read_text())
    assert rep["pass"] is True and rep["tau_star"] == 15.0 and rep["eps1a"] == 5e-5
    assert rep["lhs_step3"] <= 0.015
    assert main(["design", "--param", "tau_star=1", "--out", str(tmp_path / "b")]) == 1
    rep = json.loads((tmp_path / "b" / "design_report.json").read_text())
    assert rep["pass"] is False and rep["steps"]["step3"]["passed"] is False


def test_design_missing_envelope(tmp_path):
    doc = {"inputs": {"eps0b": 1, "eps1b": 1, "Delta": 1, "Delta1": 1, "Delta2": 1, "eps0": 1, "eps1": 1,
                      "alpha02": "s**2", "alpha12": "s**2", "alpha01_inv": "sqrt(s)"}}
    p = tmp_path / "d.json"
    p.write_text(json.dumps(doc))
    assert main(["design", "--config", str(p), "--out", str(tmp_path)]) == 2
    assert "alpha11" in json.loads((tmp_path / "error.json").read_text())["field"]
    doc["inputs"]["alpha11_inv"] = "__import__('os')"
    p.write_text(json.dumps(doc))
    assert main(["design", "--config", str(p), "--out", str(tmp_path)]) == 2
    doc["inputs"]["alpha11_inv"] = "2*max(s**0.25, s**0.5)"
    p.write_text(json.dumps(doc))
    assert main(["design", "--config", str(p), "--param", "eps1a=0.001", "--param", "tau_star=50",
                 "--out", str(tmp_path)]) in (0, 1)


def test_verify_suites(capsys):
    assert main(["verify", "--suite", "ex1-certificates"]) == 0
    assert main(["verify", "--suite", "observer-bounds", "--preset", "ex1-figA"]) == 0
    assert main(["verify", "--suite", "ex2-avoidance"]) == 0
    text = capsys.readouterr().out
    assert "min |xi - xi_bar|" in text
    assert main(["verify", "--suite", "nope"]) == 2


def test_sweep_empty_grid(tmp_path):
    assert main(["sweep", "--preset", "ex1-figA", "--grid", "seed=[]", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert len(rows) == 1
    assert grid_points({}) == ([], [])


def test_sweep_parallel_rows_in_grid_order(tmp_path):
    code = main(["sweep", "--preset", "ex1-figA", "--grid", "disturbance.delta=[0.0,0.01,0.005]",
                 "--jobs", "2", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert [float(r["disturbance.delta"]) for r in rows] == [0.0, 0.01, 0.005]
    assert all(r["error"] == "" and float(r["final_distance_A0"]) <= 0.05 for r in rows)


def test_sweep_records_row_errors(tmp_path):
    assert main(["sweep", "--preset", "ex1-figA", "--grid", "xi0=[[3,-3],[1e200,1e200]]",
                 "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert rows[0]["error"] == "" and rows[1]["error"] != ""


def test_simulate_is_deterministic(tmp_path):
    args = ["--preset", "ex1-figA", "--param", "disturbance.delta=0.01", "--seed", "5"]
    a = main(["simulate", "--out", str(tmp_path / "a"), *args])
    b = main(["simulate", "--out", str(tmp_path / "b"), *args])
    assert a == b == 0
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


@pytest.mark.parametrize("preset", ["ex1-figB", "ex2-below"])
def test_summary_agrees_with_csv_census(tmp_path, preset):
    code, out = simulate(tmp_path, "--preset", preset)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    arc = arc_from_csv((out / "trajectory.csv").read_text())
    n_c = 0 if preset.startswith("ex1") else 1
    census = switching_census(arc, SupervisedLayout(2, n_c))
    assert [[e.t, e.j, e.q_from, e.q_to] for e in census.events] == summary["switch_times"]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hybrid_uniting", "simulate", "--preset", "nope",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stderr.strip().splitlines()[-1])["field"] == "preset"


def test_sweep_initial_condition_grid_converges(tmp_path):
    axis = [-10.0, -5.0, 0.0, 5.0, 10.0]
    pts = json.dumps([[a, b] for a in axis for b in axis])
    code = main(["sweep", "--preset", "ex1-figA", "--param", "max_t=60", "--grid", f"xi0={pts}",
                 "--jobs", "4", "--out", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert len(rows) == 25
    assert all(r["termination"] == "Converged" for r in rows)
