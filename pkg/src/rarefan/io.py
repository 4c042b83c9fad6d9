"""Snapshot and field dumps (RFAN binary, CSV) and the energy time-series CSV.

RFAN layout (little-endian)::

    b"RFAN" | u32 version=1, dim, nx, ny | f64 time, dx, dy, origin_x, origin_y
    | f64 channel 0 (all cells, row-major) | f64 channel 1 | ...

Fluid snapshots carry the channels rho, m1[, m2]. Derived field dumps reuse
the layout with their channel names listed in a sidecar ``<file>.json``.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .solver import FieldSnapshot, Grid, primitive_from_conserved

MAGIC = b"RFAN"
VERSION = 1
_HEADER = struct.Struct("<4s4I5d")


class FormatError(ValueError):
    pass


def _header(grid: Grid, time: float) -> bytes:
    dy = grid.dy if grid.dim == 2 else 0.0
    y0 = grid.y0 if grid.dim == 2 else 0.0
    return _HEADER.pack(MAGIC, VERSION, grid.dim, grid.nx, grid.ny,
                        float(time), grid.dx, dy, grid.x0, y0)


def _write_channels(path, grid: Grid, time: float, channels: Sequence[np.ndarray]):
    with open(path, "wb") as fh:
        fh.write(_header(grid, time))
        for ch in channels:
            fh.write(np.ascontiguousarray(ch, dtype="<f8").reshape(-1).tobytes())


def _read(path):
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, version, dim, nx, ny, time, dx, dy, x0, y0 = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if dim == 1:
        grid = Grid(dim=1, nx=nx, dx=dx, x0=x0)
    else:
        grid = Grid(dim=2, nx=nx, dx=dx, x0=x0, ny=ny, dy=dy, y0=y0)
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    ncell = nx * ny
    if body.size % ncell:
        raise FormatError(f"{path}: payload is not a whole number of channels")
    return grid, time, body.reshape(-1, ny, nx).astype(float)


def write_snapshot(path, snap: FieldSnapshot):
    _write_channels(path, snap.grid, snap.time, list(snap.q))


def read_snapshot(path) -> FieldSnapshot:
    grid, time, chans = _read(path)
    if chans.shape[0] != 1 + grid.dim:
        raise FormatError(f"{path}: expected {1 + grid.dim} channels, found {chans.shape[0]}")
    return FieldSnapshot(grid, time, chans)


def write_fields(path, grid: Grid, time: float, fields: dict[str, np.ndarray]):
    """Dump named cell fields plus a JSON manifest next to the binary file."""
    names = list(fields)
    _write_channels(path, grid, time, [fields[k] for k in names])
    manifest = {"format": "RFAN", "version": VERSION, "file": Path(path).name, "channels": names}
    Path(str(path) + ".json").write_text(json.dumps(manifest, indent=2) + "\n")


def read_fields(path) -> tuple[Grid, float, dict[str, np.ndarray]]:
    grid, time, chans = _read(path)
    manifest = json.loads(Path(str(path) + ".json").read_text())
    names = manifest["channels"]
    if len(names) != chans.shape[0]:
        raise FormatError(f"{path}: manifest lists {len(names)} channels, file has {chans.shape[0]}")
    return grid, time, dict(zip(names, chans))


def write_snapshot_csv(path, snap: FieldSnapshot):
    """One row per cell: ``x,y,rho,v1,v2`` (y and v2 are 0 in 1D)."""
    x, y = snap.grid.centers()
    rho, v = primitive_from_conserved(snap.q)
    v2 = v[1] if snap.grid.dim == 2 else np.zeros_like(rho)
    cols = [a.reshape(-1) for a in (x, y, rho, v[0], v2)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "rho", "v1", "v2"])
        for row in zip(*cols):
            w.writerow([fmt(a) for a in row])


def fmt(x) -> str:
    """Full-precision float formatting (17 significant digits)."""
    return f"{float(x):.17g}"


def timeseries_header(max_order: int) -> list[str]:
    return (["t"] + [f"E{k}" for k in range(max_order + 1)]
            + ["E_total", "linf", "linf_grad", "flux", "chi_mu_ratio", "ba1", "ba2", "ba3"])


def timeseries_rows(reports) -> list[list[str]]:
    """Formatted rows matching :func:`timeseries_header`; missing flags count as passing."""
    rows = []
    for r in reports:
        flags = r.flags if r.flags is not None else (True, True, True)
        rows.append([fmt(r.time)] + [fmt(e) for e in r.energies]
                    + [fmt(r.total), fmt(r.linf), fmt(r.linf_grad), fmt(r.flux),
                       fmt(r.chi_mu_ratio)] + [str(int(f)) for f in flags])
    return rows


def write_timeseries(path, reports, max_order: int):
    """Energy time series; ba* columns are 1 when the assumption holds, 0 otherwise."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(timeseries_header(max_order))
        w.writerows(timeseries_rows(reports))


def read_timeseries(path) -> list[dict[str, float]]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]
