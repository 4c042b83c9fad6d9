import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rarefan import io
from rarefan.energy import EnergyReport
from rarefan.solver import FieldSnapshot, Grid


def _snap2():
    grid = Grid.from_extent((-1.0, 1.0), 6, (0.0, 1.0), 4)
    rng = np.random.default_rng(3)
    q = rng.uniform(0.5, 1.5, (3, 4, 6))
    return FieldSnapshot(grid, 1.25, q)


def test_round_trip_2d(tmp_path):
    snap = _snap2()
    io.write_snapshot(tmp_path / "a.rfan", snap)
    back = io.read_snapshot(tmp_path / "a.rfan")
    assert back.grid == snap.grid and back.time == snap.time
    assert np.array_equal(back.q, snap.q)


def test_byte_layout(tmp_path):
    snap = _snap2()
    io.write_snapshot(tmp_path / "a.rfan", snap)
    data = (tmp_path / "a.rfan").read_bytes()
    head = struct.unpack_from("<4s4I5d", data)
    assert head[:5] == (b"RFAN", 1, 2, 6, 4)
    assert head[5:] == (1.25, snap.grid.dx, snap.grid.dy, -1.0, 0.0)
    assert len(data) == 60 + 3 * 24 * 8
    # first channel, row-major, little-endian
    first = np.frombuffer(data, "<f8", count=24, offset=60).reshape(4, 6)
    assert np.array_equal(first, snap.q[0])


def test_1d_header_zeros(tmp_path):
    grid = Grid.from_extent((0.0, 1.0), 5)
    snap = FieldSnapshot(grid, 2.0, np.ones((2, 1, 5)))
    io.write_snapshot(tmp_path / "b.rfan", snap)
    head = struct.unpack_from("<4s4I5d", (tmp_path / "b.rfan").read_bytes())
    assert head[4] == 1 and head[7] == 0.0 and head[9] == 0.0
    assert io.read_snapshot(tmp_path / "b.rfan").grid == grid


def test_bad_files(tmp_path):
    (tmp_path / "x.rfan").write_bytes(b"NOPE" + bytes(56))
    with pytest.raises(io.FormatError):
        io.read_snapshot(tmp_path / "x.rfan")
    (tmp_path / "y.rfan").write_bytes(b"RF")
    with pytest.raises(io.FormatError):
        io.read_snapshot(tmp_path / "y.rfan")


def test_fields_manifest(tmp_path):
    snap = _snap2()
    fields = {"u": snap.q[0], "mu": snap.q[1]}
    io.write_fields(tmp_path / "f.rfan", snap.grid, 1.0, fields)
    grid, t, back = io.read_fields(tmp_path / "f.rfan")
    assert list(back) == ["u", "mu"] and np.array_equal(back["mu"], fields["mu"])
    with pytest.raises(io.FormatError):
        io.read_snapshot(tmp_path / "f.rfan")


def test_snapshot_csv(tmp_path):
    snap = _snap2()
    io.write_snapshot_csv(tmp_path / "s.csv", snap)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "x,y,rho,v1,v2" and len(lines) == 25


def test_timeseries(tmp_path):
    reps = [EnergyReport(1.0, [1.0, 2.0], 0.1, 0.2, 0.0, flags=(True, False, True))]
    io.write_timeseries(tmp_path / "t.csv", reps, 1)
    rows = io.read_timeseries(tmp_path / "t.csv")
    assert rows[0]["E_total"] == 3.0 and rows[0]["ba2"] == 0.0 and rows[0]["ba1"] == 1.0
    assert list(rows[0]) == io.timeseries_header(1)


@settings(max_examples=20, deadline=None)
@given(st.integers(4, 9), st.integers(4, 7), st.floats(-1e6, 1e6), st.floats(1e-6, 10.0))
def test_round_trip_property(nx, ny, x0, dx):
    import tempfile, pathlib
    grid = Grid(dim=2, nx=nx, dx=dx, x0=x0, ny=ny, dy=dx / 2, y0=-x0)
    q = np.random.default_rng(nx * ny).normal(size=(3, ny, nx))
    with tempfile.TemporaryDirectory() as d:
        p = pathlib.Path(d) / "s.rfan"
        io.write_snapshot(p, FieldSnapshot(grid, 0.5, q))
        back = io.read_snapshot(p)
    assert back.grid == grid and np.array_equal(back.q, q)
