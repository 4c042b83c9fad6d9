import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rarefan.gas import (DomainError, GasModel, PrimitiveState, char_speeds,
                         density_from_sound_speed, pressure, riemann_invariants, sound_speed)

densities = st.floats(1e-6, 1e3)
gammas = st.floats(1.05, 3.0)


def test_default_normalization(gas):
    assert gas.A == pytest.approx(1 / 1.4)
    assert sound_speed(gas, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert pressure(gas, 1.0) == pytest.approx(1 / 1.4)


def test_sound_speed_vacuum_and_arrays(gas):
    assert sound_speed(gas, 0.0) == 0.0
    out = sound_speed(gas, np.array([1.0, 2.0 ** 5]))
    assert out == pytest.approx([1.0, 2.0])


@pytest.mark.parametrize("bad", [-1e-3, np.array([1.0, -2.0]), float("nan")])
def test_negative_density_rejected(gas, bad):
    with pytest.raises(DomainError):
        sound_speed(gas, bad)


@pytest.mark.parametrize("kw", [{"gamma": 1.0}, {"gamma": 0.5}, {"A": -1.0}, {"A": 0.0}])
def test_invalid_gas(kw):
    with pytest.raises(DomainError):
        GasModel(**kw)


def test_state_validation():
    with pytest.raises(DomainError):
        PrimitiveState(0.0, (0.0,))
    with pytest.raises(ValueError):
        PrimitiveState(1.0, (0.0, 0.0, 0.0))
    assert PrimitiveState(1.0, 0.5).v == (0.5,)


def test_invariants_rest_state(gas):
    wm, wp = riemann_invariants(gas, PrimitiveState(1.0, (0.0,)))
    assert (wm, wp) == pytest.approx((-5.0, 5.0))
    assert char_speeds(gas, PrimitiveState(1.0, (0.0,))) == pytest.approx((-1.0, 1.0))


def test_axis_must_be_unit(gas):
    s = PrimitiveState(1.0, (0.3, 0.4))
    with pytest.raises(ValueError):
        char_speeds(gas, s, axis=(1.0, 1.0))
    lam = char_speeds(gas, s, axis=(0.0, 1.0))
    assert lam == pytest.approx((0.4 - 1.0, 0.4 + 1.0))


@given(gammas, densities)
def test_sound_speed_round_trip(gamma, rho):
    g = GasModel(gamma)
    assert density_from_sound_speed(g, sound_speed(g, rho)) == pytest.approx(rho, rel=1e-10)


@given(gammas, densities, st.floats(-5, 5))
def test_invariants_and_speeds_consistent(gamma, rho, v):
    g = GasModel(gamma)
    s = PrimitiveState(rho, (v,))
    wm, wp = riemann_invariants(g, s)
    lm, lp = char_speeds(g, s)
    assert 0.5 * (wm + wp) == pytest.approx(v, abs=1e-9 * (1 + abs(v) + abs(wp)))
    assert lp - lm == pytest.approx(2 * sound_speed(g, rho), abs=1e-12 * (1 + abs(v)))
    # dp/drho = c^2
    h = 1e-6 * rho
    dp = (pressure(g, rho + h) - pressure(g, rho - h)) / (2 * h)
    assert dp == pytest.approx(sound_speed(g, rho) ** 2, rel=1e-5)


@given(densities, densities)
def test_sound_speed_monotone(r1, r2):
    g = GasModel()
    if r1 < r2:
        assert sound_speed(g, r1) <= sound_speed(g, r2)
    assert math.isfinite(sound_speed(g, r1))
