"""Weighted energies of the perturbation, L-infinity norms, decay fits and bootstrap monitors.

A perturbation field is an array of shape ``(ncomp, ny, nx)`` holding the
primitive deviation ``(rho~, v~_1[, v~_2])``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .finite_diff import gradient, mixed_derivative, multi_indices
from .gas import DomainError
from .solver import FieldSnapshot, Grid, primitive_from_conserved


@dataclass(frozen=True)
class WeightSchedule:
    a0: float = 2.0
    delta: float = 0.5
    max_order: int = 3

    def __post_init__(self):
        if self.max_order < 0:
            raise ValueError("max_order must be non-negative")
        if not min(self.a0, self.a0 + self.max_order * self.delta) > 1.0:
            raise ValueError("weight exponents must exceed 1 for every order")


def weight_exponent(ws: WeightSchedule, k: int) -> float:
    """a_k = a0 + k * delta."""
    if not 0 <= k <= ws.max_order:
        raise ValueError(f"order {k} outside 0..{ws.max_order}")
    return ws.a0 + k * ws.delta


def perturbation(fluid: FieldSnapshot, reference: FieldSnapshot) -> np.ndarray:
    """Primitive-variable difference ``U - U_ref`` on a common grid.

    A ``reference`` with a different row count must be transverse-uniform; its
    first row is broadcast.
    """
    if reference.grid.nx != fluid.grid.nx or reference.grid.dim != fluid.grid.dim:
        raise ValueError("perturbation needs matching grids")
    r1, v1 = primitive_from_conserved(fluid.q)
    r0, v0 = primitive_from_conserved(reference.q)
    if reference.grid.ny != fluid.grid.ny:
        r0, v0 = r0[:1], v0[:, :1]
    return np.concatenate([(r1 - r0)[None], v1 - v0], axis=0)


def _check(pert, mu):
    mu = np.asarray(mu, dtype=float)
    if np.any(mu < 0.0):
        raise DomainError("lapse weights must be non-negative")
    if mu.shape != pert.shape[1:]:
        raise ValueError(f"weight shape {mu.shape} does not match field {pert.shape[1:]}")
    return mu


def _weighted_sum(weight, pert, grid: Grid, alpha, periodic):
    total = 0.0
    for comp in pert:
        d = mixed_derivative(comp, grid.spacing, alpha, periodic)
        total += float(np.sum(weight * d * d))
    return total


def weighted_energy(ws: WeightSchedule, pert: np.ndarray, mu: np.ndarray, k: int, grid: Grid,
                    periodic=(False, True)) -> float:
    """E_k = sum over |alpha| <= k of the midpoint quadrature of mu^{a_k} |d^alpha U~|^2."""
    mu = _check(pert, mu)
    weight = mu ** weight_exponent(ws, k)
    total = math.fsum(_weighted_sum(weight, pert, grid, alpha, periodic)
                      for alpha in multi_indices(grid.dim, k))
    return total * grid.cell_volume


def boundary_energy(ws: WeightSchedule, pert, mu, k, grid: Grid, periodic=(False, True)) -> float:
    """Part of E_k carried by the first and last cell columns in x."""
    mu = _check(pert, mu)
    weight = mu ** weight_exponent(ws, k)
    mask = np.zeros(grid.shape)
    mask[:, 0] = mask[:, -1] = 1.0
    total = math.fsum(_weighted_sum(weight * mask, pert, grid, alpha, periodic)
                      for alpha in multi_indices(grid.dim, k))
    return total * grid.cell_volume


def total_energy(ws: WeightSchedule, energies: Mapping[int, float] | Sequence[float]) -> float:
    """Sum of E_0..E_s; every order must be present."""
    if not isinstance(energies, Mapping):
        energies = dict(enumerate(energies))
    missing = [k for k in range(ws.max_order + 1) if k not in energies]
    if missing:
        raise ValueError(f"missing energy orders {missing}")
    return math.fsum(energies[k] for k in range(ws.max_order + 1))


def sonic_flux_proxy(ws: WeightSchedule, pert, mu, k: int, band: float, grid: Grid) -> float:
    """Quadrature of mu^{a_k - 1} |U~|^2 over the cells with mu < band."""
    if not band > 0.0:
        raise ValueError("band width must be positive")
    mu = _check(pert, mu)
    inside = mu < band
    w = np.where(inside, mu ** (weight_exponent(ws, k) - 1.0), 0.0)
    return float(np.sum(w * np.sum(pert * pert, axis=0))) * grid.cell_volume


def linf_norms(pert: np.ndarray, grid: Grid, periodic=(False, True)) -> tuple[float, float]:
    """Max-abs of the field and of its centered first derivatives."""
    if not np.all(np.isfinite(pert)):
        raise FloatingPointError("non-finite perturbation field")
    u_inf = float(np.max(np.abs(pert)))
    g_inf = max(float(np.max(np.abs(gradient(comp, grid.spacing, periodic)))) for comp in pert)
    return u_inf, g_inf


# ---------------------------------------------------------------------------
# decay fitting

@dataclass(frozen=True)
class DecayFit:
    alpha: float
    residual: float
    window: tuple[float, float]
    samples: int


def decay_fit(times, values, min_samples: int = 5, min_span: float = 2.0) -> DecayFit | None:
    """Least-squares fit of log(values) against log(1+t); returns the negated slope.

    Non-positive values are dropped. Returns ``None`` when fewer than
    ``min_samples`` remain or (1+t) spans less than a factor ``min_span``.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    keep = np.isfinite(y) & (y > 0.0)
    t, y = t[keep], y[keep]
    if len(t) < min_samples or (1.0 + t.max()) / (1.0 + t.min()) < min_span:
        return None
    X = np.log1p(t)
    Y = np.log(y)
    A = np.stack([X, np.ones_like(X)], axis=1)
    (slope, icpt), *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = Y - (slope * X + icpt)
    return DecayFit(alpha=float(-slope), residual=float(np.sqrt(np.mean(resid**2))),
                    window=(float(t.min()), float(t.max())), samples=int(len(t)))


# ---------------------------------------------------------------------------
# per-observation report and bootstrap monitor

@dataclass
class EnergyReport:
    time: float
    energies: list[float]
    linf: float
    linf_grad: float
    flux: float
    chi_mu_ratio: float = float("nan")
    boundary_energy: float = 0.0
    flags: tuple[bool, bool, bool] | None = None

    @property
    def total(self) -> float:
        return math.fsum(self.energies)


def energy_report(ws: WeightSchedule, pert: np.ndarray, mu: np.ndarray, grid: Grid, time: float,
                  periodic=(False, True), band_fraction: float = 0.05,
                  chi_mu: float = float("nan")) -> EnergyReport:
    energies = [weighted_energy(ws, pert, mu, k, grid, periodic) for k in range(ws.max_order + 1)]
    bnd = math.fsum(boundary_energy(ws, pert, mu, k, grid, periodic) for k in range(ws.max_order + 1))
    mu_max = float(np.max(mu))
    flux = 0.0
    if mu_max > 0.0:
        band = band_fraction * mu_max
        flux = math.fsum(sonic_flux_proxy(ws, pert, mu, k, band, grid) for k in range(ws.max_order + 1))
    u_inf, g_inf = linf_norms(pert, grid, periodic)
    return EnergyReport(time, energies, u_inf, g_inf, flux, chi_mu, bnd)


@dataclass(frozen=True)
class BootstrapResult:
    passed: bool
    first_violation: tuple[str, float] | None = None
    flags: list = field(default_factory=list)

    def as_dict(self) -> dict:
        fv = None if self.first_violation is None else {
            "assumption": self.first_violation[0], "time": self.first_violation[1]}
        return {"passed": self.passed, "first_violation": fv}


def bootstrap_flags(report: EnergyReport, C0: float, eps0: float, n: int,
                    delta: float = 0.5) -> tuple[bool, bool, bool]:
    bound = 2.0 * C0 * eps0
    s = 1.0 + report.time
    return (report.total <= bound,
            report.linf <= bound * s ** (-(n - 1) / 2.0),
            report.linf_grad <= bound * s ** (-1.0 - delta))


def bootstrap_check(reports: Sequence[EnergyReport], C0: float, eps0: float, n: int,
                    delta: float = 0.5) -> BootstrapResult:
    """Evaluate (BA1)-(BA3) at every report; comparisons are non-strict."""
    if n not in (1, 2):
        raise ValueError("bootstrap monitor supports n = 1 or 2")
    first = None
    flags = []
    for r in reports:
        f = bootstrap_flags(r, C0, eps0, n, delta)
        flags.append(f)
        if first is None:
            for name, ok in zip(("BA1", "BA2", "BA3"), f):
                if not ok:
                    first = (name, r.time)
                    break
    return BootstrapResult(first is None, first, flags)
