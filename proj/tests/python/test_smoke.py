import math

import numpy as np
import pytest

import solitonscope as ss


def test_config_round_trip():
    cfg = ss.Config.default("soliton_regression")
    assert cfg.scenario == "soliton_regression"
    assert ss.Config.from_ini(cfg.to_ini()) == cfg
    cfg.t_final = 2.0
    assert "t_final = 2" in cfg.to_ini()


def test_bad_config_raises():
    with pytest.raises(ss.InvalidArgument):
        ss.Config.from_ini("[run]\nscenario = nope\n")
    with pytest.raises(ss.Error):
        ss.Config.default("flux_classifier").stage_until = "later"


def test_soliton_profile_closed_form():
    x, u = ss.soliton_profile(1.0, 1, 20 * math.pi, 2048)
    assert np.max(np.abs(u - math.sqrt(2) / np.cosh(x))) < 1e-8


def test_evolve_keeps_soliton_modulus():
    x = ss.grid_nodes(1, 20 * math.pi, 1024)
    psi0 = math.sqrt(2) / np.cosh(x)
    out = ss.evolve(psi0.astype(complex), 1, 20 * math.pi, 1e-3, 1.0, output_stride=250)
    assert out["psi"].shape == (5, 1024)
    assert np.allclose(out["t"], [0, 0.25, 0.5, 0.75, 1.0])
    assert np.max(np.abs(out["mass"] - out["mass"][0])) < 1e-10 * out["mass"][0]
    assert np.max(np.abs(np.abs(out["psi"][-1]) - psi0)) < 1e-6


def test_run_and_report(tmp_path):
    cfg = ss.Config.default("flux_classifier")
    cfg.output_dir = str(tmp_path / "fc")
    report = ss.run(cfg)
    assert report.complete and report.passed
    assert {c["name"] for c in report.checks} >= {"flux_balance", "flux_verdict"}
    assert report.summary["flux"]["verdict"] == "always_incoming"

    again = ss.report_from_dir(tmp_path / "fc")
    assert again.passed
    assert again.to_json() == report.to_json()

    tables = ss.load_run(tmp_path / "fc")
    assert set(tables) == {"conserved", "iwc", "splitting", "flux"}
    assert tables["conserved"]["t"][0] == 0.0
