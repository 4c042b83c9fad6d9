"""Exact planar 1-rarefaction wave and its closed-form lapse.

The fan is built with the classical construction: across a 1-rarefaction the
invariant ``v1 + 2c/(gamma-1)`` is constant and the 1-characteristic speed
``v1 - c`` equals the self-similar coordinate ``xi = x1/t`` inside the fan.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .gas import (DomainError, GasModel, PrimitiveState, char_speeds,
                  density_from_sound_speed, riemann_invariants, sound_speed)
from .solver import FieldSnapshot, Grid, conserved_from_primitive


@dataclass(frozen=True)
class BackgroundWave:
    gas: GasModel
    U_minus: PrimitiveState
    U_plus: PrimitiveState

    @cached_property
    def xi_minus(self) -> float:
        return char_speeds(self.gas, self.U_minus)[0]

    @cached_property
    def xi_plus(self) -> float:
        return char_speeds(self.gas, self.U_plus)[0]

    @cached_property
    def width(self) -> float:
        return self.xi_plus - self.xi_minus

    @cached_property
    def transported_invariant(self) -> float:
        """``v1 + 2c/(gamma-1)``, constant through the fan."""
        return riemann_invariants(self.gas, self.U_minus)[1]

    @property
    def transverse(self) -> tuple[float, ...]:
        return self.U_minus.v[1:]

    def invariant_jumps(self) -> dict[str, float]:
        """Jump of each Riemann invariant between the two end states."""
        wm_l, wp_l = riemann_invariants(self.gas, self.U_minus)
        wm_r, wp_r = riemann_invariants(self.gas, self.U_plus)
        return {"w_minus": wm_r - wm_l, "w_plus": wp_r - wp_l}

    def sample_arrays(self, xi, dim: int | None = None):
        """Vectorised sampler: returns ``(rho, v)`` with ``v`` of shape ``(dim,) + xi.shape``."""
        dim = self.U_minus.dim if dim is None else dim
        xi = np.asarray(xi, dtype=float)
        g = self.gas
        K = self.transported_invariant
        c_fan = (g.gamma - 1.0) / (g.gamma + 1.0) * (K - xi)
        v_fan = xi + c_fan
        inside = (xi > self.xi_minus) & (xi < self.xi_plus)
        c_safe = np.where(inside, c_fan, 1.0)
        rho = np.where(xi <= self.xi_minus, self.U_minus.rho,
                       np.where(xi >= self.xi_plus, self.U_plus.rho,
                                density_from_sound_speed(g, c_safe)))
        v1 = np.where(xi <= self.xi_minus, self.U_minus.v[0],
                      np.where(xi >= self.xi_plus, self.U_plus.v[0], v_fan))
        v = np.empty((dim,) + xi.shape)
        v[0] = v1
        for a in range(1, dim):
            v[a] = self.transverse[a - 1] if a - 1 < len(self.transverse) else 0.0
        return np.asarray(rho, dtype=float), v


def connect_right_state(gas: GasModel, U_minus: PrimitiveState, xi_plus_target: float) -> BackgroundWave:
    """Right state on the 1-rarefaction curve through ``U_minus`` with lambda_1 = target."""
    lam_minus = char_speeds(gas, U_minus)[0]
    if xi_plus_target < lam_minus:
        raise DomainError(
            f"xi_plus={xi_plus_target} below lambda_1(U_minus)={lam_minus}: not a rarefaction")
    K = riemann_invariants(gas, U_minus)[1]
    if xi_plus_target >= K:
        raise DomainError(f"xi_plus={xi_plus_target} reaches vacuum (limit {K})")
    if xi_plus_target == lam_minus:
        return BackgroundWave(gas, U_minus, U_minus)
    c = (gas.gamma - 1.0) / (gas.gamma + 1.0) * (K - xi_plus_target)
    v1 = xi_plus_target + c
    rho = density_from_sound_speed(gas, c)
    U_plus = PrimitiveState(rho, (v1,) + U_minus.v[1:])
    return BackgroundWave(gas, U_minus, U_plus)


def sample(bg: BackgroundWave, xi: float) -> PrimitiveState:
    """Background state at self-similar coordinate ``xi``."""
    if xi <= bg.xi_minus:
        return bg.U_minus
    if xi >= bg.xi_plus:
        return bg.U_plus
    g = bg.gas
    c = (g.gamma - 1.0) / (g.gamma + 1.0) * (bg.transported_invariant - xi)
    return PrimitiveState(density_from_sound_speed(g, c), (xi + c,) + bg.transverse)


def lapse_background(bg: BackgroundWave, t, xi):
    """Closed-form lapse ``(xi - xi_-)/(xi_+ - xi_-) / t`` on the fan.

    Continued by 0 left of the fan and by the right-edge value ``1/t`` to the
    right, so the field is continuous.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise DomainError("lapse is defined for t > 0 only")
    xi = np.asarray(xi, dtype=float)
    if bg.width > 0.0:
        frac = np.clip((xi - bg.xi_minus) / bg.width, 0.0, 1.0)
    else:
        frac = np.where(xi < bg.xi_minus, 0.0, 1.0)
    out = frac / t
    return float(out) if out.ndim == 0 else out


def evaluate_on_grid(bg: BackgroundWave, grid: Grid, t: float) -> FieldSnapshot:
    """Exact background sampled at the cell centers of ``grid`` at time ``t``."""
    if t <= 0.0:
        raise DomainError("background profile needs t > 0")
    x, _ = grid.centers()
    rho, v = bg.sample_arrays(x / t, dim=grid.dim)
    return FieldSnapshot(grid, float(t), conserved_from_primitive(rho, v))


def background_lapse_on_grid(bg: BackgroundWave, grid: Grid, t: float) -> np.ndarray:
    x, _ = grid.centers()
    return lapse_background(bg, t, x / t)
