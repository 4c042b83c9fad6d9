"""Centered finite differences on ``(ny, nx)`` cell arrays.

Array axis 1 is x, axis 0 is y. Non-periodic axes use one-sided second-order
closures at the ends (first derivatives) or odd-reflection padding (higher
orders), which is exact for linear data.
"""

from __future__ import annotations

from itertools import product

import numpy as np

# central stencils for d^m/dx^m, m = 1..4 (second order)
_STENCILS = {
    1: np.array([-0.5, 0.0, 0.5]),
    2: np.array([1.0, -2.0, 1.0]),
    3: np.array([-0.5, 1.0, 0.0, -1.0, 0.5]),
    4: np.array([1.0, -4.0, 6.0, -4.0, 1.0]),
}


def _array_axis(axis: int) -> int:
    # physical axis 0 (x) -> array axis -1, physical axis 1 (y) -> array axis -2
    return -1 - axis


def derivative(f: np.ndarray, h: float, axis: int, order: int = 1, periodic: bool = False) -> np.ndarray:
    """``order``-th derivative of ``f`` along physical ``axis`` (0 = x, 1 = y)."""
    if order == 0:
        return f
    ax = _array_axis(axis)
    if order == 1 and not periodic:
        if f.shape[ax] < 3:
            raise ValueError("need at least 3 cells along the differentiated axis")
        return np.gradient(f, h, axis=ax, edge_order=2)
    if order not in _STENCILS:
        raise ValueError(f"derivative order {order} not supported")
    w = _STENCILS[order]
    r = len(w) // 2
    pad = [(0, 0)] * f.ndim
    pad[ax] = (r, r)
    if periodic:
        fp = np.pad(f, pad, mode="wrap")
    else:
        fp = np.pad(f, pad, mode="reflect", reflect_type="odd")
    n = f.shape[ax]
    out = np.zeros_like(f, dtype=float)
    for k, wk in enumerate(w):
        if wk == 0.0:
            continue
        sl = [slice(None)] * f.ndim
        sl[ax] = slice(k, k + n)
        out += wk * fp[tuple(sl)]
    return out / h**order


def gradient(f: np.ndarray, spacing, periodic=(False, True)) -> np.ndarray:
    """Stack of first derivatives, shape ``(dim,) + f.shape``."""
    return np.stack([derivative(f, h, a, 1, periodic[a]) for a, h in enumerate(spacing)])


def multi_indices(dim: int, max_order: int):
    """All multi-indices alpha with |alpha| <= max_order, in graded order."""
    out = []
    for total in range(max_order + 1):
        for alpha in product(range(total + 1), repeat=dim):
            if sum(alpha) == total:
                out.append(alpha)
    return out


def mixed_derivative(f: np.ndarray, spacing, alpha, periodic=(False, True)) -> np.ndarray:
    out = f
    for a, m in enumerate(alpha):
        if m:
            out = derivative(out, spacing[a], a, m, periodic[a])
    return out
