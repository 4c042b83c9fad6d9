"""Polytropic (barotropic) gas law and pointwise characteristic quantities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

RHO_FLOOR = 1e-10


class DomainError(ValueError):
    """Raised when a state lies outside the physical domain (e.g. rho < 0)."""


@dataclass(frozen=True)
class GasModel:
    """Barotropic gas with p = A * rho**gamma."""

    gamma: float = 1.4
    A: float | None = None

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise DomainError(f"gamma must exceed 1, got {self.gamma}")
        if self.A is None:
            # default normalization: c(rho=1) = 1
            object.__setattr__(self, "A", 1.0 / self.gamma)
        if not self.A > 0.0:
            raise DomainError(f"A must be positive, got {self.A}")


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    v: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(float(x) for x in np.atleast_1d(self.v)))
        if len(self.v) not in (1, 2):
            raise ValueError(f"velocity must have 1 or 2 components, got {len(self.v)}")
        if not (np.isfinite(self.rho) and self.rho > 0.0):
            raise DomainError(f"density must be strictly positive, got {self.rho}")
        if not all(np.isfinite(self.v)):
            raise DomainError("velocity must be finite")

    @property
    def dim(self) -> int:
        return len(self.v)


def _check_rho(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0) or np.any(np.isnan(rho)):
        raise DomainError("density must be non-negative")
    return rho


def _normal_velocity(s: PrimitiveState, axis) -> float:
    if axis is None:
        return s.v[0]
    return float(np.dot(s.v, _unit_axis(axis, s.dim)))


def _unit_axis(axis: Sequence[float], dim: int) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    if axis.shape != (dim,):
        raise ValueError(f"axis must have {dim} components, got shape {axis.shape}")
    if abs(np.linalg.norm(axis) - 1.0) > 1e-12:
        raise ValueError(f"axis must be a unit vector, |axis| = {np.linalg.norm(axis)}")
    return axis


def pressure(g: GasModel, rho):
    """p = A rho^gamma. Accepts scalars or arrays."""
    rho = _check_rho(rho)
    out = g.A * rho**g.gamma
    return float(out) if out.ndim == 0 else out


def sound_speed(g: GasModel, rho):
    """c = sqrt(A gamma rho^(gamma-1)); zero at vacuum."""
    if type(rho) is float and rho >= 0.0:
        return math.sqrt(g.A * g.gamma * rho ** (g.gamma - 1.0))
    rho = _check_rho(rho)
    out = np.sqrt(g.A * g.gamma * rho ** (g.gamma - 1.0))
    return float(out) if out.ndim == 0 else out


def density_from_sound_speed(g: GasModel, c):
    """Inverse of :func:`sound_speed`."""
    if type(c) is float and c >= 0.0:
        return (c * c / (g.A * g.gamma)) ** (1.0 / (g.gamma - 1.0))
    c = np.asarray(c, dtype=float)
    if np.any(c < 0.0):
        raise DomainError("sound speed must be non-negative")
    out = (c * c / (g.A * g.gamma)) ** (1.0 / (g.gamma - 1.0))
    return float(out) if out.ndim == 0 else out


def riemann_invariants(g: GasModel, s: PrimitiveState, axis=None) -> tuple[float, float]:
    """Return ``(w_minus, w_plus)`` with w = v.axis -/+ 2c/(gamma-1)."""
    vn = _normal_velocity(s, axis)
    h = 2.0 * sound_speed(g, s.rho) / (g.gamma - 1.0)
    return vn - h, vn + h


def char_speeds(g: GasModel, s: PrimitiveState, axis=None) -> tuple[float, float]:
    """Acoustic characteristic speeds ``(v.axis - c, v.axis + c)``."""
    vn = _normal_velocity(s, axis)
    c = sound_speed(g, s.rho)
    return vn - c, vn + c
