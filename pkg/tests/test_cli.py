"""End-to-end exercise of the command-line surface through click's runner."""

import json
import re

import pytest
from click.testing import CliRunner

from hyperwedge.cli import main

# Background free stream at gamma=1.4, a=2: rho=1, u=v=0, p = 1/(gamma a^2).
BG = "1,0,0,0.17857142857142858"

WEDGE_CFG = {
    "scenario": "wedge",
    "tau_grid": [0.1, 0.05, 0.025],
    "wedge_angle": 0.01,
    "data_amplitude": 1e-3,
    "engine": {"nu": 8, "h": 0.03125, "seed": 0, "x_end": 1.0},
    "x_station": 1.0,
}

STAB_CFG = {
    "scenario": "stability",
    "tau_grid": [0.1],
    "wedge_angle": 0.01,
    "data_amplitude": 1e-3,
    "data_perturbation": 1.5e-3,
    "boundary_perturbation": 1.5e-3,
    "engine": {"nu": 8, "h": 0.03125, "seed": 0, "x_end": 1.0},
    "x_station": 1.0,
}


@pytest.fixture()
def runner():
    return CliRunner()


def _cfg_file(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_riemann_prints_waves_and_middles(runner):
    # Pure density shift rides on the contact family alone.
    res = runner.invoke(main, ["riemann", "--below", BG,
                               "--above", "1.001,0,0,0.17857142857142858",
                               "--tau", "0.1"])
    assert res.exit_code == 0, res.output
    waves = re.findall(r"wave (\d): sigma=([^\s]+)", res.output)
    assert [w[0] for w in waves] == ["1", "2", "3", "4"]
    sigmas = [float(w[1]) for w in waves]
    assert sigmas[2] == pytest.approx(1e-3, rel=1e-6)
    for j in (0, 1, 3):
        assert abs(sigmas[j]) < 1e-12
    assert len(re.findall(r"middle \d: rho=", res.output)) == 3


def test_riemann_outside_trust_region_exits_3(runner):
    res = runner.invoke(main, ["riemann", "--below", BG,
                               "--above", "2,0,0,0.17857142857142858"])
    assert res.exit_code == 3
    assert "error:" in res.stderr


def test_riemann_malformed_state_exits_2(runner):
    res = runner.invoke(main, ["riemann", "--below", "1,2,3", "--above", BG])
    assert res.exit_code == 2
    assert "error:" in res.stderr


def test_riemann_bad_gas_exits_2(runner):
    # tau must stay below the inverse-slope parameter.
    res = runner.invoke(main, ["riemann", "--below", BG, "--above", BG,
                               "--tau", "3.0"])
    assert res.exit_code == 2


def test_special_writes_rate_and_coeffs(runner, tmp_path):
    out = tmp_path / "out"
    res = runner.invoke(main, ["special", "--eps", "1e-3",
                               "--tau", "0.1,0.05,0.025",
                               "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert "fitted slope" in res.output
    rate = (out / "rate.csv").read_text().splitlines()
    assert rate[0] == "tau,E,E_over_eps_x_tau2"
    assert len(rate) == 4
    coeffs = (out / "coeffs.csv").read_text().splitlines()
    assert coeffs[0] == "name,measured,closed_form,rel_err"
    assert len(coeffs) > 1


def test_converge_writes_rate_csv(runner, tmp_path):
    cfg = _cfg_file(tmp_path, WEDGE_CFG)
    out = tmp_path / "out"
    res = runner.invoke(main, ["converge", "--config", cfg, "--out", str(out)])
    assert res.exit_code == 0, res.output
    assert "fitted slope" in res.output
    rate = (out / "rate.csv").read_text().splitlines()
    assert rate[0] == "tau,E,E_over_eps_x_tau2"
    assert len(rate) == 4


def test_converge_rejects_wrong_scenario(runner, tmp_path):
    cfg = _cfg_file(tmp_path, STAB_CFG)
    res = runner.invoke(main, ["converge", "--config", cfg,
                               "--out", str(tmp_path / "out")])
    assert res.exit_code == 2
    assert "scenario" in res.stderr


def test_stability_writes_csv(runner, tmp_path):
    cfg = _cfg_file(tmp_path, STAB_CFG)
    out = tmp_path / "out"
    res = runner.invoke(main, ["stability", "--config", cfg, "--out", str(out)])
    assert res.exit_code == 0, res.output
    rows = (out / "stability.csv").read_text().splitlines()
    assert rows[0] == "case,input_delta,output_delta,ratio"
    assert [r.split(",")[0] for r in rows[1:]] == ["data", "boundary", "both"]


def test_unknown_config_key_exits_2(runner, tmp_path):
    bad = dict(WEDGE_CFG)
    bad["bogus"] = 1
    cfg = _cfg_file(tmp_path, bad)
    res = runner.invoke(main, ["converge", "--config", cfg,
                               "--out", str(tmp_path / "out")])
    assert res.exit_code == 2
    assert "error:" in res.stderr


def test_missing_config_file_exits_2(runner, tmp_path):
    res = runner.invoke(main, ["converge", "--config",
                               str(tmp_path / "nope.json"),
                               "--out", str(tmp_path / "out")])
    assert res.exit_code == 2


def test_simulate_writes_trajectory_and_trace(runner, tmp_path):
    cfg = _cfg_file(tmp_path, WEDGE_CFG)
    out = tmp_path / "out"
    res = runner.invoke(main, ["simulate", "--config", cfg, "--out", str(out)])
    assert res.exit_code == 0, res.output
    traj = (out / "trajectory.txt").read_text()
    assert traj.startswith("x_end,h,nu,tau,gamma,a_inf,seed")
    assert "SLICE x=" in traj
    trace = (out / "glimm.csv").read_text().splitlines()
    assert trace[0] == "x,value,event_kind"
    assert len(trace) > 2


def test_simulate_rejects_special_scenario(runner, tmp_path):
    cfg = _cfg_file(tmp_path, {"scenario": "special",
                               "tau_grid": [0.1, 0.05, 0.025]})
    res = runner.invoke(main, ["simulate", "--config", cfg,
                               "--out", str(tmp_path / "out")])
    assert res.exit_code == 2
    assert "scenario" in res.stderr
