import json
from pathlib import Path

import numpy as np
import pytest

from monocert.cli import EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE, main


def _write(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=1))


def _lv_sim_cfg(horizon=400):
    return {
        "system": {"name": "lotka_volterra", "params": {"tau": 0.2}},
        "tail_window": 50,
        "runs": [
            {"start": [1.46, 0.84, 0.67, 1.59, 0.78], "horizon": horizon, "seed": 1,
             "source": {"kind": "none"}, "output": "lv1.json", "csv": "lv1.csv"},
            {"start": [8.65, 9.74, 8.83, 9.17, 9.61], "horizon": horizon, "seed": 2,
             "source": {"kind": "none"}, "output": "lv2.json"},
        ],
    }


def _lv_verify_cfg(width=1.0):
    return {
        "system": {"name": "lotka_volterra", "params": {"tau": 0.2}},
        "trajectories": ["lv1.json", "lv2.json"],
        "lipschitz": {"L_x": 1.5, "L_w": 1.0, "D_w": 0.0},
        "partition_width": width,
        "validation": {"runs": 100, "horizon": 100, "seed": 77},
        "output": {"certificate": "cert.json", "report": "report.json"},
    }


def _traffic_sim_cfg():
    return {
        "system": {"name": "traffic", "params": {"tau": 0.01, "x_max": [10.0, 10.0]}},
        "tail_window": 50,
        "runs": [
            {"start": [9.5, 9.9], "horizon": 1000, "seed": 1,
             "source": {"kind": "policy",
                        "policy": {"kind": "constant", "u": [9.0, 0.6], "name": "pi1"}},
             "output": "tr1.json"},
            {"start": [0.1, 0.3], "horizon": 1000, "seed": 2,
             "source": {"kind": "policy",
                        "policy": {"kind": "constant", "u": [9.0, 0.5], "name": "pi2"}},
             "output": "tr2.json"},
        ],
    }


def _traffic_synth_cfg():
    return {
        "system": {"name": "traffic", "params": {"tau": 0.01, "x_max": [10.0, 10.0]}},
        "trajectories": ["tr1.json", "tr2.json"],
        "policies": [
            {"kind": "constant", "u": [9.0, 0.6], "name": "pi1"},
            {"kind": "constant", "u": [9.0, 0.5], "name": "pi2"},
        ],
        "partition_width": 1.0,
        "loss": "support_size",
        "validation": {"runs": 100, "horizon": 300, "seed": 77},
        "output": {"certificate": "cert.json", "report": "report.json"},
    }


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_verify_pipeline_end_to_end(workdir):
    _write(workdir / "sim.json", _lv_sim_cfg())
    assert main(["simulate", "--config", "sim.json"]) == EXIT_OK
    assert (workdir / "lv1.csv").exists()
    _write(workdir / "ver.json", _lv_verify_cfg())
    assert main(["verify", "--config", "ver.json"]) == EXIT_OK
    report = json.loads((workdir / "report.json").read_text())
    assert report["status"] == "optimal"
    assert report["validation"]["ok"] is True
    cert = json.loads((workdir / "cert.json").read_text())
    assert cert["mode"] == "robust"
    assert len(cert["coefficients"]["b"]) == 2


def test_verify_coarse_grid_is_inconclusive(workdir):
    _write(workdir / "sim.json", _lv_sim_cfg())
    main(["simulate", "--config", "sim.json"])
    _write(workdir / "ver.json", _lv_verify_cfg(width=5.0))
    assert main(["verify", "--config", "ver.json"]) == EXIT_INCONCLUSIVE
    report = json.loads((workdir / "report.json").read_text())
    assert report["status"] == "infeasible"
    assert report["diagnostics"]


def test_synthesize_pipeline_end_to_end(workdir):
    _write(workdir / "sim.json", _traffic_sim_cfg())
    assert main(["simulate", "--config", "sim.json"]) == EXIT_OK
    _write(workdir / "syn.json", _traffic_synth_cfg())
    assert main(["synthesize", "--config", "syn.json"]) == EXIT_OK
    cert = json.loads((workdir / "cert.json").read_text())
    assert cert["pattern"] == {"kp": [0], "kq": [1]}
    lo = np.array(cert["controller_boxes"]["lower"])
    hi = np.array(cert["controller_boxes"]["upper"])
    assert np.all(lo == [9.0, 0.5]) and np.all(hi == [9.0, 0.6])

    # validate the written certificate with a fresh seed
    _write(workdir / "val.json", {
        "system": {"name": "traffic", "params": {"tau": 0.01, "x_max": [10.0, 10.0]}},
        "certificate": "cert.json",
        "validation": {"runs": 50, "horizon": 200, "seed": 911},
    })
    assert main(["validate", "--config", "val.json"]) == EXIT_OK

    # eval-grid over the 2-D domain
    assert main(["eval-grid", "--certificate", "cert.json", "--resolution", "30",
                 "--out", "grid.csv"]) == EXIT_OK
    lines = (workdir / "grid.csv").read_text().strip().splitlines()
    assert lines[0] == "x1,x2,value"
    assert len(lines) == 1 + 30 * 30
    # dominance values are step functions: the surface is piecewise constant,
    # so distinct levels are far fewer than nodes and neighbours often agree
    values = [line.split(",")[2] for line in lines[1:]]
    assert len(set(values)) < 450
    same_neighbour = sum(a == b for a, b in zip(values, values[1:]))
    assert same_neighbour > 0.1 * len(values)
    # sign pattern: the initial region sits inside the 0-sublevel set, the
    # unsafe region outside it
    for line in lines[1:]:
        x1, x2, v = (float(c) for c in line.split(","))
        if 4.0 <= x1 <= 6.0 and 4.0 <= x2 <= 6.0:
            assert v <= 0.0
        if (x1 <= 1.0 and x2 <= 1.0) or x2 >= 9.0 or x1 >= 9.0:
            assert v > 0.0

    # recorded inputs travel with the data files
    tr1 = json.loads((workdir / "tr1.json").read_text())
    assert tr1["policy_id"] == "pi1"
    assert len(tr1["inputs"]) == 1000 and tr1["inputs"][0] == [9.0, 0.6]


def test_synthesize_refusals_listed_when_tails_unusable(workdir):
    _write(workdir / "sim.json", _traffic_sim_cfg())
    main(["simulate", "--config", "sim.json"])
    cfg = _traffic_synth_cfg()
    # force the one pattern whose tail requirements both trajectories violate
    cfg["pattern"] = {"kp": [1], "kq": [0]}
    _write(workdir / "syn.json", cfg)
    assert main(["synthesize", "--config", "syn.json"]) == EXIT_INCONCLUSIVE
    report = json.loads((workdir / "report.json").read_text())
    states = {p["pattern"]: p["state"] for p in report["patterns"]}
    assert states["Kp=[1] Kq=[0]"] == "refused"


def test_validate_rejects_tampered_trajectory(workdir):
    _write(workdir / "sim.json", _traffic_sim_cfg())
    main(["simulate", "--config", "sim.json"])
    _write(workdir / "syn.json", _traffic_synth_cfg())
    main(["synthesize", "--config", "syn.json"])
    # tamper with one recorded state
    data = json.loads((workdir / "tr1.json").read_text())
    data["states"][5][0] += 1e-3
    (workdir / "tr1.json").write_text(json.dumps(data))
    _write(workdir / "val.json", {
        "system": {"name": "traffic", "params": {"tau": 0.01, "x_max": [10.0, 10.0]}},
        "certificate": "cert.json",
        "validation": {"runs": 10, "horizon": 50, "seed": 1},
    })
    assert main(["validate", "--config", "val.json"]) == EXIT_USAGE


def test_usage_errors(workdir):
    assert main(["verify", "--config", "missing.json"]) == EXIT_USAGE

    _write(workdir / "bad.json", {"system": {"name": "no_such_system"},
                                  "trajectories": ["x.json"],
                                  "partition_width": 1.0})
    assert main(["verify", "--config", "bad.json"]) == EXIT_USAGE

    cfg = _lv_verify_cfg()
    del cfg["lipschitz"]
    _write(workdir / "nolips.json", cfg)
    _write(workdir / "sim.json", _lv_sim_cfg(horizon=5))
    main(["simulate", "--config", "sim.json"])
    assert main(["verify", "--config", "nolips.json"]) == EXIT_USAGE

    bad_sim = _lv_sim_cfg(horizon=5)
    bad_sim["runs"][0]["source"] = {"kind": "wat"}
    _write(workdir / "badsim.json", bad_sim)
    assert main(["simulate", "--config", "badsim.json"]) == EXIT_USAGE


def test_zero_horizon_simulation(workdir):
    cfg = {
        "system": {"name": "lotka_volterra", "params": {"tau": 0.2}},
        "tail_window": 50,
        "runs": [{"start": [5.0] * 5, "horizon": 0, "seed": 0,
                  "source": {"kind": "none"}, "output": "single.json"}],
    }
    _write(workdir / "sim.json", cfg)
    assert main(["simulate", "--config", "sim.json"]) == EXIT_OK
    data = json.loads((workdir / "single.json").read_text())
    assert data["horizon"] == 0 and len(data["states"]) == 1


def test_info_command(workdir, capsys):
    assert main(["info"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "lotka_volterra" in out and "backend" in out


def test_eval_grid_single_node(workdir):
    _write(workdir / "sim.json", _traffic_sim_cfg())
    main(["simulate", "--config", "sim.json"])
    _write(workdir / "syn.json", _traffic_synth_cfg())
    main(["synthesize", "--config", "syn.json"])
    assert main(["eval-grid", "--certificate", "cert.json", "--resolution", "1",
                 "--out", "one.csv"]) == EXIT_OK
    lines = (workdir / "one.csv").read_text().strip().splitlines()
    assert len(lines) == 2  # header + the domain's lower corner


def test_eval_grid_bad_slice_spec(workdir):
    _write(workdir / "sim.json", _traffic_sim_cfg())
    main(["simulate", "--config", "sim.json"])
    _write(workdir / "syn.json", _traffic_synth_cfg())
    main(["synthesize", "--config", "syn.json"])
    assert main(["eval-grid", "--certificate", "cert.json", "--resolution", "4",
                 "--out", "g.csv", "--axes", "nope"]) == EXIT_USAGE


def test_lp_dump_flag(workdir):
    _write(workdir / "sim.json", _lv_sim_cfg())
    main(["simulate", "--config", "sim.json"])
    _write(workdir / "ver.json", _lv_verify_cfg())
    assert main(["verify", "--config", "ver.json", "--lp-dump", "program.lp"]) == EXIT_OK
    text = (workdir / "program.lp").read_text()
    assert text.startswith("Minimize") and "Subject To" in text


def test_eval_grid_5d_slice(workdir):
    _write(workdir / "sim.json", _lv_sim_cfg())
    main(["simulate", "--config", "sim.json"])
    _write(workdir / "ver.json", _lv_verify_cfg())
    assert main(["verify", "--config", "ver.json"]) == EXIT_OK
    # a 5-D certificate needs an explicit 2-D slice
    assert main(["eval-grid", "--certificate", "cert.json", "--resolution", "5",
                 "--out", "g5.csv"]) == EXIT_USAGE
    assert main(["eval-grid", "--certificate", "cert.json", "--resolution", "5",
                 "--out", "g5.csv", "--axes", "1,3",
                 "--fix", "2=5.0,4=5.0,5=5.0"]) == EXIT_OK
    lines = (workdir / "g5.csv").read_text().strip().splitlines()
    assert lines[0] == "x1,x3,value"
    assert len(lines) == 1 + 25


def test_simulate_seed_override_changes_disturbed_runs(workdir):
    cfg = {
        "system": {"name": "contractive", "params": {"dim": 2}},
        "tail_window": 5,
        "runs": [{"start": [0.1, 0.1], "horizon": 20, "seed": 1,
                  "source": {"kind": "disturbance"}, "output": "w.json"}],
    }
    _write(workdir / "sim.json", cfg)
    main(["simulate", "--config", "sim.json"])
    first = (workdir / "w.json").read_bytes()
    main(["simulate", "--config", "sim.json", "--seed", "2"])
    assert (workdir / "w.json").read_bytes() != first
    main(["simulate", "--config", "sim.json", "--seed", "1"])
    assert (workdir / "w.json").read_bytes() == first


def test_synthesize_milp_flag_matches_enumeration(workdir):
    _write(workdir / "sim.json", _traffic_sim_cfg())
    main(["simulate", "--config", "sim.json"])
    _write(workdir / "syn.json", _traffic_synth_cfg())
    assert main(["synthesize", "--config", "syn.json", "--milp"]) == EXIT_OK
    cert = json.loads((workdir / "cert.json").read_text())
    assert cert["pattern"] == {"kp": [0], "kq": [1]}
