"""Static SVG line plots of run diagnostics."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.linewidth": 0.6,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 3,
    "grid.linewidth": 0.4,
    "grid.alpha": 0.3,
    # fixed ids and no timestamp so the same data gives the same bytes
    "svg.hashsalt": "rarefan",
    "svg.fonttype": "none",
}


def _figure():
    fig, ax = plt.subplots(figsize=(4.5, 3.0))
    ax.grid(True)
    return fig, ax


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def plot_energy(path, t, energy):
    with plt.rc_context(_RC):
        fig, ax = _figure()
        e = np.asarray(energy, dtype=float)
        if np.all(e > 0):
            ax.semilogy(t, e, "o-", label=r"$\mathcal{E}_s$")
        else:
            ax.plot(t, e, "o-", label=r"$\mathcal{E}_s$")
        ax.set_xlabel("t")
        ax.set_ylabel("total weighted energy")
        ax.legend()
        _save(fig, path)


def plot_linf(path, t, linf, linf_grad=None, alpha=None):
    """Perturbation sup-norms against 1+t on log axes, with an optional fitted slope."""
    with plt.rc_context(_RC):
        fig, ax = _figure()
        s = 1.0 + np.asarray(t, dtype=float)
        y = np.asarray(linf, dtype=float)
        if np.all(y > 0):
            ax.loglog(s, y, "o-", label=r"$\|\tilde U\|_\infty$")
            if alpha is not None:
                ref = y[0] * (s / s[0]) ** (-alpha)
                ax.loglog(s, ref, "--", color="0.4", label=f"slope -{alpha:.2f}")
            if linf_grad is not None and np.all(np.asarray(linf_grad) > 0):
                ax.loglog(s, linf_grad, "s-", label=r"$\|\partial\tilde U\|_\infty$")
        else:
            ax.plot(s, y, "o-", label=r"$\|\tilde U\|_\infty$")
        ax.set_xlabel("1 + t")
        ax.legend()
        _save(fig, path)


def plot_convergence(path, dx, err):
    with plt.rc_context(_RC):
        fig, ax = _figure()
        ax.loglog(dx, err, "o-", label="L1 error")
        dx = np.asarray(dx, dtype=float)
        ax.loglog(dx, err[0] * (dx / dx[0]) ** 2, "--", color="0.4", label="second order")
        ax.set_xlabel("dx")
        ax.legend()
        _save(fig, path)


def plot_profile(path, xi, rho, v1, mu):
    """Background fan profile and lapse against the self-similar coordinate."""
    with plt.rc_context(_RC):
        fig, ax = _figure()
        ax.plot(xi, rho, label=r"$\rho$")
        ax.plot(xi, v1, label=r"$v_1$")
        ax.plot(xi, mu, label=r"$\bar\mu$")
        ax.set_xlabel(r"$\xi = x_1/t$")
        ax.legend()
        _save(fig, path)
