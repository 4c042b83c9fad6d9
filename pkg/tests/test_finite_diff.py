import numpy as np
import pytest

from rarefan.finite_diff import derivative, gradient, mixed_derivative, multi_indices


def test_multi_indices_counts():
    assert multi_indices(1, 3) == [(0,), (1,), (2,), (3,)]
    assert len(multi_indices(2, 3)) == 10
    assert multi_indices(2, 1) == [(0, 0), (0, 1), (1, 0)]


def test_linear_data_exact():
    x = np.linspace(0, 1, 11)[None, :]
    h = 0.1
    assert np.allclose(derivative(3 * x, h, 0, 1), 3.0)
    assert np.allclose(derivative(3 * x, h, 0, 2), 0.0, atol=1e-10)


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_periodic_second_order(order):
    errs = []
    for n in (32, 64):
        h = 1.0 / n
        x = (np.arange(n) + 0.5)[None, :] * h
        f = np.sin(2 * np.pi * x)
        exact = (2 * np.pi) ** order * np.sin(2 * np.pi * x + order * np.pi / 2)
        errs.append(np.max(np.abs(derivative(f, h, 0, order, True) - exact)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_y_axis_and_gradient():
    ny, nx = 8, 6
    y = (np.arange(ny)[:, None] + 0.5) / ny * np.ones((1, nx))
    g = gradient(2 * y, (1 / nx, 1 / ny), (False, False))
    assert g.shape == (2, ny, nx)
    assert np.allclose(g[0], 0.0) and np.allclose(g[1], 2.0)


def test_mixed_derivative():
    n = 64
    h = 1.0 / n
    c = (np.arange(n) + 0.5) * h
    x, y = np.meshgrid(c, c)
    f = np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    d = mixed_derivative(f, (h, h), (1, 1), (True, True))
    exact = (2 * np.pi) ** 2 * np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y)
    assert np.max(np.abs(d - exact)) < 0.05 * (2 * np.pi) ** 2


def test_errors():
    with pytest.raises(ValueError):
        derivative(np.ones((1, 2)), 1.0, 0, 1)
    with pytest.raises(ValueError):
        derivative(np.ones((1, 8)), 1.0, 0, 5, True)
