import csv
import io as _io
import json

import numpy as np
import pytest

from rarefan import io
from rarefan.background import connect_right_state, evaluate_on_grid
from rarefan.gas import GasModel, PrimitiveState
from rarefan.harness.cli import build_parser, main
from rarefan.solver import Grid


def test_help_documents_flags(capsys):
    for cmd in ("background", "simulate", "geometry", "energy", "report"):
        with pytest.raises(SystemExit):
            build_parser().parse_args([cmd, "--help"])
        out = capsys.readouterr().out
        assert out.startswith("usage:") and "--out" in out or cmd == "report"
    assert main(["--help"]) == 0


def test_background_table(capsys):
    assert main(["background", "--t", "2", "--samples", "5"]) == 0
    rows = list(csv.reader(_io.StringIO(capsys.readouterr().out)))
    assert rows[0] == ["xi", "rho", "v1", "mu"] and len(rows) == 6
    assert float(rows[3][0]) == pytest.approx(-0.75) and float(rows[3][3]) == 0.25


def test_background_explicit_xi_and_plot(tmp_path, capsys):
    out = tmp_path / "bg.csv"
    assert main(["background", "--xi", "-0.75", "--t", "2", "--out", str(out),
                 "--plot", str(tmp_path / "bg.svg")]) == 0
    assert (tmp_path / "bg.svg").exists()
    assert out.read_text().splitlines()[1].endswith(",0.25")


def test_background_invalid_fan(capsys):
    assert main(["background", "--xi-plus", "-2"]) == 1
    assert "rarefaction" in capsys.readouterr().err


def test_simulate_missing_config(capsys):
    assert main(["simulate", "missing.json"]) == 1
    assert "missing.json" in capsys.readouterr().err


def test_bad_flag_is_validation_error():
    assert main(["background", "--samples", "x"]) == 1


def _zero_dump(tmp_path, dim=1):
    gas = GasModel()
    v = (0.0,) * dim
    bg = connect_right_state(gas, PrimitiveState(1.0, v), -0.5)
    grid = Grid.from_extent((-3.0, 1.0), 40) if dim == 1 else Grid.from_extent((-3.0, 1.0), 40, (0, 1), 4)
    path = tmp_path / f"zero{dim}.rfan"
    io.write_snapshot(path, evaluate_on_grid(bg, grid, 1.5))
    return path


def test_energy_zero_perturbation(tmp_path, capsys):
    path = _zero_dump(tmp_path)
    assert main(["energy", "--snapshot", str(path), "--order", "0"]) == 0
    rows = list(csv.DictReader(_io.StringIO(capsys.readouterr().out)))
    assert float(rows[0]["E0"]) == 0.0 and float(rows[0]["t"]) == 1.5


def test_geometry_command(tmp_path, capsys):
    path = _zero_dump(tmp_path, dim=2)
    snap = io.read_snapshot(path)
    x, _ = snap.grid.centers()
    io.write_fields(tmp_path / "u.rfan", snap.grid, 1.5, {"u": np.array(x)})
    assert main(["geometry", "--snapshot", str(path), "--fields", str(tmp_path / "u.rfan"),
                 "--out", str(tmp_path / "g.rfan")]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["omega_absmax"] == 0.0 and out["chi_mu_ratio"] == pytest.approx(0.0, abs=1e-12)
    _, _, fields = io.read_fields(tmp_path / "g.rfan")
    assert set(fields) == {"omega", "mu", "trchi"}


def test_geometry_missing_snapshot(tmp_path):
    assert main(["geometry", "--snapshot", str(tmp_path / "none.rfan")]) == 1


def test_simulate_and_report(tmp_path, capsys):
    cfg = {"name": "tiny", "grid": {"nx": 40}, "t_end": 1.25, "plots": False,
           "checks": {"energy_growth_max": 3.0}}
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(cfg))
    assert main(["simulate", str(p), "--out", str(tmp_path / "run")]) == 0
    capsys.readouterr()
    assert main(["report", str(tmp_path / "run")]) == 0
    assert "tiny:" in capsys.readouterr().out
    assert main(["report", str(tmp_path / "nowhere")]) == 1


def test_simulate_abort_exit_code(tmp_path, monkeypatch):
    import rarefan.harness.experiment as exp
    from rarefan.solver import SolverAbort

    def boom(*a, **k):
        raise SolverAbort(1.1, (0, 2))

    monkeypatch.setattr(exp, "run_experiment", boom)
    p = tmp_path / "c.json"
    p.write_text("{}")
    assert main(["simulate", str(p)]) == 2


def test_summary_json_usable_as_config(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"name": "again", "grid": {"nx": 40}, "t_end": 1.25, "plots": False}))
    assert main(["simulate", str(p), "--out", str(tmp_path / "a")]) == 0
    assert main(["simulate", str(tmp_path / "a" / "summary.json"), "--out", str(tmp_path / "b")]) == 0
    for name in ("timeseries.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
