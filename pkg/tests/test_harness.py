import dataclasses
import json

import numpy as np
import pytest

import rarefan.solver as solver_mod
from rarefan.background import evaluate_on_grid
from rarefan.harness.config import ConfigError, config_from_dict
from rarefan.harness.experiment import (build_initial_data, characteristic_crossing_time,
                                        make_background, make_gas, run_experiment)
from rarefan.solver import SolverAbort, primitive_from_conserved


def _cfg(**over):
    base = {
        "name": "small",
        "fan": {"left_v": [0.0, 0.0]},
        "grid": {"dim": 2, "nx": 40, "x_range": [-4.0, 4.0], "ny": 8, "y_range": [-1.0, 1.0]},
        "t_end": 1.5,
        "observe_every": 0.25,
        "plots": False,
    }
    for k, v in over.items():
        if isinstance(v, dict) and k in base:
            base[k] = {**base[k], **v}
        else:
            base[k] = v
    return config_from_dict(base)


def test_zero_amplitude_is_background():
    cfg = _cfg()
    snap = build_initial_data(cfg)
    ref = evaluate_on_grid(make_background(cfg), snap.grid, 1.0)
    assert np.array_equal(snap.q, ref.q)


def test_density_pulse_peak():
    # 1D grid whose cell center sits on the pulse center
    cfg = config_from_dict({"grid": {"dim": 1, "nx": 400, "x_range": [-3.0, 5.0]},
                            "perturbation": {"kind": "gaussian_density", "amplitude": 1e-3,
                                             "center": [1.01], "width": 0.25}})
    snap = build_initial_data(cfg)
    ref = evaluate_on_grid(make_background(cfg), snap.grid, 1.0)
    d = np.abs(snap.q[0] - ref.q[0])
    assert d.max() == pytest.approx(1e-3, rel=1e-12)
    assert snap.grid.x_centers()[np.argmax(d[0])] == pytest.approx(1.01)


def test_transverse_sine_periodic():
    cfg = _cfg(perturbation={"kind": "transverse_sine", "amplitude": 1e-3, "center": [1.0, 0.0],
                             "width": 0.2, "wavenumber": 2})
    snap = build_initial_data(cfg)
    ref = evaluate_on_grid(make_background(cfg), snap.grid, 1.0)
    d = snap.q[0] - ref.q[0]
    # two full periods across 8 rows: shifting by half the rows reproduces the field
    assert np.allclose(np.roll(d, 4, axis=0), d, atol=1e-15)
    assert np.allclose(d.sum(axis=0), 0.0, atol=1e-15)


def test_vortical_and_radial_kinds():
    vort = build_initial_data(_cfg(perturbation={"kind": "vortical", "amplitude": 1e-3,
                                                 "center": [1.0, 0.0], "width": 0.15}))
    rad = build_initial_data(_cfg(perturbation={"kind": "gaussian_velocity", "direction": "radial",
                                                "amplitude": 1e-3, "center": [1.0, 0.0], "width": 0.15}))
    for snap in (vort, rad):
        _, v = primitive_from_conserved(snap.q)
        assert np.isfinite(v).all()


def test_support_touching_boundary_rejected():
    cfg = _cfg(perturbation={"kind": "gaussian_density", "amplitude": 1e-3, "center": [3.5, 0.0],
                             "width": 0.2})
    with pytest.raises(ConfigError, match="support"):
        build_initial_data(cfg)


def test_simple_wave_crossing_time():
    cfg = config_from_dict({"fan": {"xi_plus": -1.0}, "grid": {"nx": 1000, "x_range": [-4.0, 6.0]},
                            "perturbation": {"kind": "gaussian_density", "amplitude": 0.2,
                                             "center": [2.0], "width": 0.4, "simple_wave": True}})
    gas = make_gas(cfg)
    t_star = characteristic_crossing_time(gas, build_initial_data(cfg))
    # small-amplitude estimate: d(lambda_1)/dc = -(gamma+1)/(gamma-1), dc/drho = 0.2 at rho = 1
    approx = 1.0 / (6.0 * 0.2 * 0.2 * np.exp(-0.5) / 0.4)
    assert t_star == pytest.approx(approx, rel=0.25)
    flat = dataclasses.replace(cfg, perturbation=dataclasses.replace(cfg.perturbation, amplitude=0.0))
    assert characteristic_crossing_time(gas, build_initial_data(flat)) == np.inf


def test_run_outputs(tmp_path):
    cfg = _cfg(perturbation={"kind": "gaussian_velocity", "direction": "radial", "amplitude": 1e-3,
                             "center": [1.0, 0.0], "width": 0.15},
               diagnostics={"eikonal": True, "vorticity": True, "max_order": 2},
               snapshot_times=[1.5], plots=True,
               checks={"energy_growth_max": 3.0, "bootstrap": True})
    rep = run_experiment(cfg, tmp_path)
    summ = json.loads((tmp_path / "summary.json").read_text())
    assert {"config", "decay_fit", "bootstrap", "checks", "timings"} <= set(summ)
    assert summ["complete"] is True
    for f in rep.files:
        assert (tmp_path / f).exists(), f
    assert (tmp_path / "snap_t001.5000.rfan").exists()
    assert (tmp_path / "energy.svg").exists()
    assert set(rep.checks) == {"energy_bounded", "bootstrap"}
    assert len(rep.reports) == 3


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("RAREFAN_OUT", str(tmp_path / "env"))
    rep = run_experiment(_cfg())
    assert rep.output_dir == str(tmp_path / "env")
    assert (tmp_path / "env" / "timeseries.csv").exists()


def test_zero_perturbation_energy_is_zero(tmp_path):
    rep = run_experiment(_cfg(), tmp_path)
    assert all(r.total == 0.0 for r in rep.reports)


def test_abort_writes_partial_summary(tmp_path, monkeypatch):
    real = solver_mod.step

    def broken(gas, snap, dt, cfg, background=None):
        out = real(gas, snap, dt, cfg, background)
        if out.time > 1.2:
            q = out.q.copy()
            q[0, 0, 3] = np.nan
            return dataclasses.replace(out, q=q)
        return out

    monkeypatch.setattr(solver_mod, "step", broken)
    with pytest.raises(SolverAbort):
        run_experiment(_cfg(diagnostics={"reference": "exact"}), tmp_path)
    summ = json.loads((tmp_path / "summary.json").read_text())
    assert summ["complete"] is False
    assert summ["error"]["cell"] == [0, 3]
