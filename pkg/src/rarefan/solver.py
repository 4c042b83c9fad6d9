"""Finite-volume integrator for the barotropic Euler equations in 1D and 2D.

Cells are stored as arrays of shape ``(ny, nx)`` (``ny == 1`` in 1D), so a
C-order flatten gives the row-major cell ordering used by the dump format.
Conserved variables are stacked along a leading axis: ``q[0]`` is density and
``q[1:]`` the momentum components.

The scheme is MUSCL (minmod-limited, primitive variables) with a Rusanov or
HLL face flux and the two-stage SSP Runge-Kutta time advance.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .gas import RHO_FLOOR, DomainError, GasModel, PrimitiveState, sound_speed

log = logging.getLogger(__name__)

NGHOST = 2


class SolverAbort(RuntimeError):
    """Non-finite values appeared in the solution."""

    def __init__(self, time: float, cell: tuple[int, ...], message: str = "non-finite state"):
        self.time = time
        self.cell = cell
        super().__init__(f"{message} at t={time!r}, cell (j, i)={cell}")


@dataclass(frozen=True)
class Grid:
    """Uniform Cartesian grid; ``x0``/``y0`` is the lower-left domain corner."""

    dim: int
    nx: int
    dx: float
    x0: float = 0.0
    ny: int = 1
    dy: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.nx < 4:
            raise ValueError(f"nx must be >= 4, got {self.nx}")
        if not self.dx > 0:
            raise ValueError(f"dx must be positive, got {self.dx}")
        if self.dim == 1:
            if self.ny != 1:
                raise ValueError("1D grids have ny == 1")
        else:
            if self.ny < 4:
                raise ValueError(f"ny must be >= 4, got {self.ny}")
            if not self.dy > 0:
                raise ValueError(f"dy must be positive, got {self.dy}")

    @classmethod
    def from_extent(cls, x_range, nx, y_range=None, ny=None) -> "Grid":
        x_lo, x_hi = map(float, x_range)
        if y_range is None:
            return cls(dim=1, nx=nx, dx=(x_hi - x_lo) / nx, x0=x_lo)
        y_lo, y_hi = map(float, y_range)
        return cls(dim=2, nx=nx, dx=(x_hi - x_lo) / nx, x0=x_lo,
                   ny=ny, dy=(y_hi - y_lo) / ny, y0=y_lo)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.ny, self.nx)

    @property
    def spacing(self) -> tuple[float, ...]:
        return (self.dx,) if self.dim == 1 else (self.dx, self.dy)

    @property
    def cell_volume(self) -> float:
        return self.dx if self.dim == 1 else self.dx * self.dy

    @property
    def x_extent(self) -> tuple[float, float]:
        return self.x0, self.x0 + self.nx * self.dx

    @property
    def y_extent(self) -> tuple[float, float]:
        return self.y0, self.y0 + self.ny * self.dy

    def x_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self) -> np.ndarray:
        if self.dim == 1:
            return np.zeros(1)
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    def centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinate arrays, each of shape ``(ny, nx)``."""
        x = np.broadcast_to(self.x_centers()[None, :], self.shape)
        y = np.broadcast_to(self.y_centers()[:, None], self.shape)
        return x, y

    def scaled(self, s: float) -> "Grid":
        return dataclasses.replace(self, dx=self.dx * s, x0=self.x0 * s,
                                   dy=self.dy * s, y0=self.y0 * s)


@dataclass(frozen=True)
class FieldSnapshot:
    """Conserved state on a grid at one time. ``q`` has shape ``(1+dim, ny, nx)``."""

    grid: Grid
    time: float
    q: np.ndarray
    floor_hits: int = 0

    def __post_init__(self):
        expected = (1 + self.grid.dim,) + self.grid.shape
        if self.q.shape != expected:
            raise ValueError(f"state shape {self.q.shape} != {expected}")

    @property
    def rho(self) -> np.ndarray:
        return self.q[0]

    @property
    def momentum(self) -> np.ndarray:
        return self.q[1:]

    def velocity(self) -> np.ndarray:
        return self.q[1:] / self.q[0]

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.q)))


@dataclass(frozen=True)
class SolverConfig:
    cfl: float = 0.45
    limiter: str = "minmod"  # or "none" for first order
    boundary: str = "background"  # x faces: background | periodic | outflow
    flux: str = "rusanov"  # or "hll"
    rho_floor: float = RHO_FLOOR

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.limiter not in ("minmod", "none"):
            raise ValueError(f"unknown limiter {self.limiter!r}")
        if self.boundary not in ("background", "periodic", "outflow"):
            raise ValueError(f"unknown boundary policy {self.boundary!r}")
        if self.flux not in ("rusanov", "hll"):
            raise ValueError(f"unknown flux scheme {self.flux!r}")
        if not self.rho_floor > 0.0:
            raise ValueError("rho_floor must be positive")


# ---------------------------------------------------------------------------
# state conversions and fluxes

def conserved_from_primitive(rho, v):
    """Stack ``(rho, rho*v)``; works on scalars or arrays (v has a leading component axis)."""
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(rho <= 0.0):
        raise DomainError("density must be strictly positive")
    return np.concatenate([rho[None], rho[None] * v], axis=0)


def primitive_from_conserved(q):
    """Inverse of :func:`conserved_from_primitive`: returns ``(rho, v)``."""
    q = np.asarray(q, dtype=float)
    rho = q[0]
    if np.any(rho <= 0.0):
        raise DomainError("density must be strictly positive")
    return rho, q[1:] / rho


def state_to_conserved(s: PrimitiveState) -> np.ndarray:
    return conserved_from_primitive(s.rho, np.asarray(s.v))


def conserved_to_state(q) -> PrimitiveState:
    rho, v = primitive_from_conserved(q)
    return PrimitiveState(float(rho), tuple(np.atleast_1d(v)))


def _axis_vector(axis, dim):
    if isinstance(axis, (int, np.integer)):
        n = np.zeros(dim)
        n[axis] = 1.0
        return n
    n = np.asarray(axis, dtype=float)
    if n.shape != (dim,):
        raise ValueError(f"axis must have {dim} components")
    return n


def _flux_from_primitive(gas, rho, v, n):
    # v has shape (dim, ...); n is a unit vector of length dim
    vn = np.tensordot(n, v, axes=1)
    p = gas.A * rho**gas.gamma
    mass = rho * vn
    mom = rho * v * vn + p * n.reshape((-1,) + (1,) * np.ndim(rho))
    return np.concatenate([mass[None], mom], axis=0)


def physical_flux(gas: GasModel, q, axis) -> np.ndarray:
    """Exact Euler flux of conserved state(s) ``q`` through a face with normal ``axis``."""
    q = np.asarray(q, dtype=float)
    n = _axis_vector(axis, q.shape[0] - 1)
    rho, v = primitive_from_conserved(q)
    return _flux_from_primitive(gas, rho, v, n)


def numerical_flux(gas: GasModel, left, right, axis, scheme: str = "rusanov") -> np.ndarray:
    """Face flux between primitive states ``left`` and ``right``.

    ``left``/``right`` are ``(rho, v)`` pairs (arrays allowed) or
    :class:`PrimitiveState` instances.
    """
    if isinstance(left, PrimitiveState):
        left = (np.asarray(left.rho), np.asarray(left.v))
    if isinstance(right, PrimitiveState):
        right = (np.asarray(right.rho), np.asarray(right.v))
    rl, vl = (np.asarray(a, dtype=float) for a in left)
    rr, vr = (np.asarray(a, dtype=float) for a in right)
    n = _axis_vector(axis, vl.shape[0])
    return _face_flux(gas, rl, vl, rr, vr, n, scheme)


def _face_flux(gas, rl, vl, rr, vr, n, scheme):
    fl = _flux_from_primitive(gas, rl, vl, n)
    fr = _flux_from_primitive(gas, rr, vr, n)
    ql = np.concatenate([rl[None], rl[None] * vl], axis=0)
    qr = np.concatenate([rr[None], rr[None] * vr], axis=0)
    cl = np.sqrt(gas.A * gas.gamma * rl ** (gas.gamma - 1.0))
    cr = np.sqrt(gas.A * gas.gamma * rr ** (gas.gamma - 1.0))
    vnl = np.tensordot(n, vl, axes=1)
    vnr = np.tensordot(n, vr, axes=1)
    if scheme == "rusanov":
        a = np.maximum(np.abs(vnl) + cl, np.abs(vnr) + cr)
        return 0.5 * (fl + fr) - 0.5 * a * (qr - ql)
    if scheme == "hll":
        sl = np.minimum(vnl - cl, vnr - cr)
        sr = np.maximum(vnl + cl, vnr + cr)
        hll = (sr * fl - sl * fr + sl * sr * (qr - ql)) / (sr - sl)
        return np.where(sl >= 0.0, fl, np.where(sr <= 0.0, fr, hll))
    raise ValueError(f"unknown flux scheme {scheme!r}")


# ---------------------------------------------------------------------------
# time step control

def cfl_dt(gas: GasModel, snap: FieldSnapshot, cfl: float) -> float:
    """Largest stable step: cfl * min over cells and axes of h / (|v.axis| + c)."""
    if not snap.is_finite():
        raise SolverAbort(snap.time, _first_bad_cell(snap.q), "non-finite field in cfl_dt")
    rho, v = primitive_from_conserved(snap.q)
    c = sound_speed(gas, rho)
    dt = np.inf
    for a, h in enumerate(snap.grid.spacing):
        dt = min(dt, float(np.min(h / (np.abs(v[a]) + c))))
    return cfl * dt


def _first_bad_cell(q) -> tuple[int, ...]:
    bad = ~np.all(np.isfinite(q), axis=0)
    idx = np.argwhere(bad)
    return tuple(int(i) for i in idx[0]) if len(idx) else ()


# ---------------------------------------------------------------------------
# spatial operator

def _minmod(a, b):
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _pad_primitive(W, grid: Grid, cfg: SolverConfig, t: float, background):
    """Add NGHOST ghost layers in x (per boundary policy) and periodic layers in y."""
    g = NGHOST
    if cfg.boundary == "periodic":
        W = np.pad(W, ((0, 0), (0, 0), (g, g)), mode="wrap")
    elif cfg.boundary == "outflow":
        W = np.pad(W, ((0, 0), (0, 0), (g, g)), mode="edge")
    else:
        if background is None:
            raise ValueError("boundary policy 'background' requires a background wave")
        xc = grid.x_centers()
        xg = np.concatenate([xc[0] - grid.dx * np.arange(g, 0, -1),
                             xc[-1] + grid.dx * np.arange(1, g + 1)])
        rho_g, v_g = background.sample_arrays(xg / t, dim=grid.dim)
        ghost = np.concatenate([rho_g[None], v_g], axis=0)[:, None, :]
        ghost = np.broadcast_to(ghost, (W.shape[0], W.shape[1], 2 * g))
        W = np.concatenate([ghost[..., :g], W, ghost[..., g:]], axis=2)
    if grid.dim == 2:
        W = np.pad(W, ((0, 0), (g, g), (0, 0)), mode="wrap")
    return W


def _face_states(W, axis: int, limited: bool):
    """Left/right states at the interior faces along ``axis`` (array axis 1 or 2).

    ``W`` is padded by NGHOST along ``axis``; returns states for the nfaces =
    ncells + 1 faces bounding the physical cells.
    """
    d = np.diff(W, axis=axis)
    n = W.shape[axis]
    sl = [slice(None)] * W.ndim

    def take(arr, start, stop):
        s = list(sl)
        s[axis] = slice(start, stop)
        return arr[tuple(s)]

    if limited:
        slope = _minmod(take(d, 0, n - 2), take(d, 1, n - 1))  # cells 1 .. n-2
    else:
        slope = np.zeros_like(take(W, 1, n - 1))
    centre = take(W, 1, n - 1)
    wl = take(centre + 0.5 * slope, 0, n - 3)  # cells 1 .. n-3
    wr = take(centre - 0.5 * slope, 1, n - 2)  # cells 2 .. n-2
    return wl, wr


def rhs(gas: GasModel, q: np.ndarray, grid: Grid, cfg: SolverConfig, t: float, background=None):
    """Semi-discrete right-hand side -div(F) for the conserved array ``q``."""
    rho = np.maximum(q[0], cfg.rho_floor)
    v = q[1:] / rho
    W = np.concatenate([rho[None], v], axis=0)
    Wp = _pad_primitive(W, grid, cfg, t, background)
    g = NGHOST
    limited = cfg.limiter == "minmod"
    out = np.zeros_like(q)
    # x direction: strip y ghosts
    Wx = Wp[:, g:-g, :] if grid.dim == 2 else Wp
    wl, wr = _face_states(Wx, 2, limited)
    F = _face_flux(gas, wl[0], wl[1:], wr[0], wr[1:], _axis_vector(0, grid.dim), cfg.flux)
    out -= (F[..., 1:] - F[..., :-1]) / grid.dx
    if grid.dim == 2:
        Wy = Wp[:, :, g:-g]
        wl, wr = _face_states(Wy, 1, limited)
        G = _face_flux(gas, wl[0], wl[1:], wr[0], wr[1:], _axis_vector(1, 2), cfg.flux)
        out -= (G[:, 1:, :] - G[:, :-1, :]) / grid.dy
    return out


def _apply_floor(q, floor):
    low = q[0] < floor
    hits = int(np.count_nonzero(low))
    if hits:
        q = q.copy()
        q[0] = np.where(low, floor, q[0])
    return q, hits


def step(gas: GasModel, snap: FieldSnapshot, dt: float, cfg: SolverConfig,
         background=None) -> FieldSnapshot:
    """Advance one SSP-RK2 step of size ``dt``."""
    grid, t = snap.grid, snap.time
    q1 = snap.q + dt * rhs(gas, snap.q, grid, cfg, t, background)
    q1, h1 = _apply_floor(q1, cfg.rho_floor)
    q2 = 0.5 * snap.q + 0.5 * (q1 + dt * rhs(gas, q1, grid, cfg, t + dt, background))
    q2, h2 = _apply_floor(q2, cfg.rho_floor)
    if h1 or h2:
        log.warning("density floor applied to %d cells at t=%.6g", h1 + h2, t + dt)
    return FieldSnapshot(grid, t + dt, q2, snap.floor_hits + h1 + h2)


# ---------------------------------------------------------------------------
# driver

def observation_times(t0: float, t_end: float, every: float | None) -> list[float]:
    if every is None or every <= 0:
        return [t_end]
    k = int(np.floor((t_end - t0) / every + 1e-9))
    times = [t0 + i * every for i in range(1, k + 1)]
    if not times or t_end - times[-1] > 1e-12 * max(1.0, abs(t_end)):
        times.append(t_end)
    return times


@dataclass
class Observation:
    time: float
    snapshot: FieldSnapshot
    values: list = field(default_factory=list)


def run(gas: GasModel, initial: FieldSnapshot, cfg: SolverConfig, t_end: float,
        observers: Iterable[Callable[[FieldSnapshot], object]] = (),
        observe_every: float | None = None, background=None,
        on_step: Callable[[FieldSnapshot, FieldSnapshot, float], None] | None = None,
        times: Sequence[float] | None = None) -> list[Observation]:
    """Integrate from ``initial.time`` to ``t_end``.

    Observers are called on the initial snapshot and at every observation time
    (steps are shortened to land exactly on them). ``on_step(old, new, dt)`` is
    called after each step, before observers, so co-evolved fields can follow
    the same time levels. ``times`` overrides the regular cadence.
    """
    observers = list(observers)
    if t_end < initial.time:
        raise ValueError(f"t_end={t_end} precedes initial time {initial.time}")
    records = [Observation(initial.time, initial, [f(initial) for f in observers])]
    if t_end == initial.time:
        return records
    snap = initial
    if times is None:
        targets = observation_times(initial.time, t_end, observe_every)
    else:
        targets = sorted({float(t) for t in times if initial.time < t <= t_end} | {float(t_end)})
    for t_obs in targets:
        while snap.time < t_obs:
            dt = cfl_dt(gas, snap, cfg.cfl)
            if snap.time + dt >= t_obs or t_obs - (snap.time + dt) < 1e-12 * dt:
                dt = t_obs - snap.time
            new = step(gas, snap, dt, cfg, background)
            if t_obs - new.time < 1e-13 * max(1.0, abs(t_obs)):
                new = dataclasses.replace(new, time=t_obs)
            if not new.is_finite():
                raise SolverAbort(new.time, _first_bad_cell(new.q))
            if on_step is not None:
                on_step(snap, new, dt)
            snap = new
        records.append(Observation(snap.time, snap, [f(snap) for f in observers]))
    return records


def uniform_snapshot(grid: Grid, state: PrimitiveState, time: float = 0.0) -> FieldSnapshot:
    """Snapshot holding ``state`` in every cell."""
    if state.dim != grid.dim:
        raise ValueError("state and grid dimensions differ")
    q = state_to_conserved(state)
    q = np.broadcast_to(q[:, None, None], (1 + grid.dim,) + grid.shape).copy()
    return FieldSnapshot(grid, time, q)


def snapshot_from_primitive(grid: Grid, time: float, rho, v) -> FieldSnapshot:
    return FieldSnapshot(grid, time, conserved_from_primitive(rho, v))


def total_conserved(snap: FieldSnapshot) -> np.ndarray:
    """Cell-volume-weighted totals of mass and momentum components."""
    return np.array([np.sum(c) for c in snap.q]) * snap.grid.cell_volume
