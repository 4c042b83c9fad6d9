"""Acoustical metric, eikonal transport, lapse, null frames, front expansion and vorticity.

Everything is evaluated in the Cartesian frame (t, x1[, x2]); spacetime
vectors are arrays ``(V^t, V^1[, V^2])``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .finite_diff import derivative, gradient
from .gas import DomainError, GasModel, PrimitiveState, sound_speed
from .solver import FieldSnapshot, Grid, SolverAbort, primitive_from_conserved

GRAD_FLOOR = 1e-6
MU_CLAMP = 1e-4


# ---------------------------------------------------------------------------
# pointwise geometry

@dataclass(frozen=True)
class AcousticalMetric:
    g: np.ndarray
    g_inv: np.ndarray

    def inner(self, V, W) -> float:
        return float(np.asarray(V) @ self.g @ np.asarray(W))


def metric_at(gas: GasModel, s: PrimitiveState) -> AcousticalMetric:
    """Metric ``g`` and its closed-form inverse at state ``s``."""
    c = sound_speed(gas, s.rho)
    v = np.asarray(s.v)
    n = len(v)
    g = np.empty((n + 1, n + 1))
    g[0, 0] = -c * c + v @ v
    g[0, 1:] = g[1:, 0] = -v
    g[1:, 1:] = np.eye(n)
    # the bracket is the inverse only up to the factor 1/c^2
    gi = np.empty_like(g)
    gi[0, 0] = -1.0
    gi[0, 1:] = gi[1:, 0] = -v
    gi[1:, 1:] = c * c * np.eye(n) - np.outer(v, v)
    return AcousticalMetric(g, gi / (c * c))


@dataclass(frozen=True)
class NullFrame:
    L: np.ndarray
    Lbar: np.ndarray
    X: tuple[np.ndarray, ...]

    def identities(self, metric: AcousticalMetric) -> dict[str, float]:
        """Residuals of the null-frame relations (all zero for an exact frame)."""
        ip = metric.inner
        out = {
            "g(L,L)": ip(self.L, self.L),
            "g(Lbar,Lbar)": ip(self.Lbar, self.Lbar),
            "g(L,Lbar)+2": ip(self.L, self.Lbar) + 2.0,
        }
        for A, XA in enumerate(self.X):
            out[f"g(L,X{A})"] = ip(self.L, XA)
            out[f"g(Lbar,X{A})"] = ip(self.Lbar, XA)
            for B, XB in enumerate(self.X):
                out[f"g(X{A},X{B})-d"] = ip(XA, XB) - (1.0 if A == B else 0.0)
        return out

    def inverse_metric(self) -> np.ndarray:
        """``-(L Lbar + Lbar L)/2 + sum_A X_A X_A``."""
        gi = -0.5 * (np.outer(self.L, self.Lbar) + np.outer(self.Lbar, self.L))
        for XA in self.X:
            gi = gi + np.outer(XA, XA)
        return gi


def null_frame_at(gas: GasModel, s: PrimitiveState, n) -> NullFrame:
    """Null frame for a front with unit spatial normal ``n``.

    L = (1, v - c n) moves with the 1-family front; Lbar = (1, v + c n)/c^2 so
    that g(L, Lbar) = -2; X_A = (0, tau_A) spans the front tangents.
    """
    n = np.asarray(n, dtype=float)
    if n.shape != (s.dim,) or abs(np.linalg.norm(n) - 1.0) > 1e-12:
        raise ValueError("front normal must be a unit vector of the state's dimension")
    c = sound_speed(gas, s.rho)
    v = np.asarray(s.v)
    L = np.concatenate([[1.0], v - c * n])
    Lbar = np.concatenate([[1.0], v + c * n]) / (c * c)
    if s.dim == 1:
        X = ()
    else:
        X = (np.array([0.0, -n[1], n[0]]),)
    return NullFrame(L, Lbar, X)


# ---------------------------------------------------------------------------
# eikonal field

@dataclass
class EikonalField:
    grid: Grid
    time: float
    u: np.ndarray
    periodic: tuple[bool, bool] = (False, True)
    g_floor: float = GRAD_FLOOR

    @cached_property
    def grad(self) -> np.ndarray:
        return gradient(self.u, self.grid.spacing, self.periodic)

    @cached_property
    def grad_norm(self) -> np.ndarray:
        return np.sqrt(np.sum(self.grad**2, axis=0))

    @cached_property
    def flagged(self) -> np.ndarray:
        return self.grad_norm < self.g_floor

    @cached_property
    def normal(self) -> np.ndarray:
        norm = np.where(self.flagged, 1.0, self.grad_norm)
        return np.where(self.flagged, np.nan, self.grad / norm)


def eikonal_init(grid: Grid, time: float = 1.0, periodic=(False, True)) -> EikonalField:
    """u = x1 at the cell centers."""
    x, _ = grid.centers()
    return EikonalField(grid, float(time), np.array(x, dtype=float), tuple(periodic))


def _one_sided(u, h, axis, periodic):
    ax = -1 - axis
    pad = [(0, 0)] * u.ndim
    pad[ax] = (1, 1)
    up = np.pad(u, pad, mode="wrap") if periodic else np.pad(u, pad, mode="reflect", reflect_type="odd")
    n = u.shape[ax]

    def sl(a, b):
        s = [slice(None)] * u.ndim
        s[ax] = slice(a, b)
        return tuple(s)

    dm = (up[sl(1, n + 1)] - up[sl(0, n)]) / h
    dp = (up[sl(2, n + 2)] - up[sl(1, n + 1)]) / h
    return dm, dp


def _eikonal_rate(gas: GasModel, fluid: FieldSnapshot, ek: EikonalField, u: np.ndarray) -> np.ndarray:
    # du/dt = -v.grad u + c |grad u|: advection upwinded on v, the normal-speed
    # term with the Osher-Sethian switch for a front moving against grad u
    rho, v = primitive_from_conserved(fluid.q)
    c = sound_speed(gas, rho)
    adv = np.zeros_like(u)
    norm2 = np.zeros_like(u)
    for a, h in enumerate(ek.grid.spacing):
        dm, dp = _one_sided(u, h, a, ek.periodic[a])
        adv += v[a] * np.where(v[a] > 0.0, dm, dp)
        norm2 += np.maximum(dp, 0.0) ** 2 + np.minimum(dm, 0.0) ** 2
    return -adv + c * np.sqrt(norm2)


def eikonal_step(gas: GasModel, fluid: FieldSnapshot, ek: EikonalField, dt: float,
                 fluid_next: FieldSnapshot | None = None) -> EikonalField:
    """Advance u by ``dt`` along the 1-family (SSP-RK2, first-order upwind in space).

    ``fluid_next`` (the fluid at t + dt) is used for the second stage when given.
    """
    if fluid.grid != ek.grid:
        raise ValueError("eikonal and fluid grids differ")
    u1 = ek.u + dt * _eikonal_rate(gas, fluid, ek, ek.u)
    u2 = 0.5 * ek.u + 0.5 * (u1 + dt * _eikonal_rate(gas, fluid_next or fluid, ek, u1))
    if not np.all(np.isfinite(u2)):
        bad = np.argwhere(~np.isfinite(u2))[0]
        raise SolverAbort(ek.time + dt, tuple(int(i) for i in bad), "non-finite eikonal")
    return EikonalField(ek.grid, ek.time + dt, u2, ek.periodic, ek.g_floor)


def eikonal_residual(gas: GasModel, fluid: FieldSnapshot, ek_old: EikonalField,
                     ek_new: EikonalField) -> np.ndarray:
    """g^{ab} du_a du_b with the time derivative taken from the discrete update."""
    dt = ek_new.time - ek_old.time
    ut = (ek_new.u - ek_old.u) / dt
    rho, v = primitive_from_conserved(fluid.q)
    c = sound_speed(gas, rho)
    gu = ek_new.grad
    vgu = np.sum(v * gu, axis=0)
    return -(ut + vgu) ** 2 + c * c * np.sum(gu * gu, axis=0)


def lapse_from_eikonal(gas: GasModel, fluid: FieldSnapshot, ek: EikonalField) -> np.ndarray:
    """mu = 1/(c |grad u|); NaN in cells where |grad u| is below the floor."""
    rho, _ = primitive_from_conserved(fluid.q)
    c = sound_speed(gas, rho)
    norm = np.where(ek.flagged, 1.0, ek.grad_norm)
    return np.where(ek.flagged, np.nan, 1.0 / (c * norm))


def tr_chi(gas: GasModel, fluid: FieldSnapshot, ek: EikonalField) -> np.ndarray:
    """Expansion of the fronts: tangential divergence of w = v - c n."""
    grid = ek.grid
    if grid.dim == 1:
        return np.where(ek.flagged, np.nan, 0.0)
    rho, v = primitive_from_conserved(fluid.q)
    c = sound_speed(gas, rho)
    n = np.where(ek.flagged, 0.0, ek.normal)
    w = v - c * n
    out = np.zeros_like(rho)
    for i, hi in enumerate(grid.spacing):
        for j in range(grid.dim):
            proj = (1.0 if i == j else 0.0) - n[i] * n[j]
            out += proj * derivative(w[j], hi, i, 1, ek.periodic[i])
    return np.where(ek.flagged, np.nan, out)


def vorticity(fluid: FieldSnapshot, periodic=(False, True)) -> np.ndarray:
    """Scalar curl dv2/dx1 - dv1/dx2 (2D only)."""
    grid = fluid.grid
    if grid.dim != 2:
        raise ValueError("vorticity is defined for 2D snapshots only")
    _, v = primitive_from_conserved(fluid.q)
    return (derivative(v[1], grid.dx, 0, 1, periodic[0])
            - derivative(v[0], grid.dy, 1, 1, periodic[1]))


def velocity_gradient_norm(fluid: FieldSnapshot, periodic=(False, True)) -> float:
    """max over cells of the Frobenius norm of grad v."""
    _, v = primitive_from_conserved(fluid.q)
    total = np.zeros(fluid.grid.shape)
    for comp in v:
        total += np.sum(gradient(comp, fluid.grid.spacing, periodic) ** 2, axis=0)
    return float(np.sqrt(np.max(total)))


# ---------------------------------------------------------------------------
# diagnostics bundle

@dataclass
class GeometryDiagnostics:
    mu: np.ndarray
    trchi: np.ndarray
    omega: np.ndarray | None
    mu_clamp: float = MU_CLAMP
    ratio: np.ndarray = field(init=False)

    def __post_init__(self):
        self.ratio = np.abs(self.trchi) / np.maximum(self.mu, self.mu_clamp)

    def summary(self) -> dict[str, float]:
        out = {
            "mu_min": float(np.nanmin(self.mu)),
            "mu_max": float(np.nanmax(self.mu)),
            "trchi_absmax": float(np.nanmax(np.abs(self.trchi))),
            "chi_mu_ratio": chi_mu_ratio(self),
        }
        if self.omega is not None:
            out["omega_absmax"] = float(np.max(np.abs(self.omega)))
        return out


def geometry_diagnostics(gas: GasModel, fluid: FieldSnapshot, ek: EikonalField,
                         mu_clamp: float = MU_CLAMP) -> GeometryDiagnostics:
    mu = lapse_from_eikonal(gas, fluid, ek)
    chi = tr_chi(gas, fluid, ek)
    omega = vorticity(fluid, ek.periodic) if fluid.grid.dim == 2 else None
    return GeometryDiagnostics(mu, chi, omega, mu_clamp)


def chi_mu_ratio(diag: GeometryDiagnostics) -> float:
    """max over cells of |tr chi| / max(mu, mu_clamp), ignoring flagged cells."""
    if diag.mu.shape != diag.trchi.shape:
        raise ValueError("mu and tr chi fields have different shapes")
    r = diag.ratio[np.isfinite(diag.ratio)]
    return float(np.max(r)) if r.size else 0.0


def check_positive_density(fluid: FieldSnapshot, floor: float):
    """Diagnostics refuse vacuum states rather than clamping them."""
    if np.any(fluid.rho <= floor):
        raise DomainError(f"density at or below {floor} in diagnostics at t={fluid.time}")
