"""Build initial data, run a configured experiment, write its outputs and evaluate checks."""

from __future__ import annotations

import dataclasses
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import io
from ..background import (BackgroundWave, background_lapse_on_grid, connect_right_state,
                          evaluate_on_grid)
from ..energy import (DecayFit, EnergyReport, WeightSchedule, bootstrap_check, decay_fit,
                      energy_report, perturbation)
from ..finite_diff import derivative
from ..gas import GasModel, PrimitiveState, sound_speed
from ..geometry import (EikonalField, eikonal_init, eikonal_residual, eikonal_step,
                        geometry_diagnostics, velocity_gradient_norm, vorticity)
from ..solver import (FieldSnapshot, Grid, SolverAbort, SolverConfig, observation_times,
                      primitive_from_conserved, run, snapshot_from_primitive, step)
from . import plotting
from .config import ConfigError, ExperimentConfig

log = logging.getLogger(__name__)

SUPPORT_SIGMAS = 6.0
BUFFER_FRACTION = 0.1


# ---------------------------------------------------------------------------
# construction helpers

def make_gas(cfg: ExperimentConfig) -> GasModel:
    return GasModel(cfg.gas.gamma, cfg.gas.A)


def make_background(cfg: ExperimentConfig, gas: GasModel | None = None) -> BackgroundWave:
    gas = gas or make_gas(cfg)
    v = list(cfg.fan.left_v) + [0.0] * (cfg.grid.dim - len(cfg.fan.left_v))
    return connect_right_state(gas, PrimitiveState(cfg.fan.left_rho, tuple(v)), cfg.fan.xi_plus)


def make_grid(cfg: ExperimentConfig, nx: int | None = None) -> Grid:
    g = cfg.grid
    if g.dim == 1:
        return Grid.from_extent(g.x_range, nx or g.nx)
    return Grid.from_extent(g.x_range, nx or g.nx, g.y_range, g.ny)


def make_solver_config(cfg: ExperimentConfig) -> SolverConfig:
    s = cfg.solver
    return SolverConfig(cfl=s.cfl, limiter=s.limiter, boundary=s.boundary, flux=s.flux,
                        rho_floor=s.rho_floor)


def _truncated_gaussian(r2, sigma):
    return np.where(r2 <= (SUPPORT_SIGMAS * sigma) ** 2, np.exp(-0.5 * r2 / sigma**2), 0.0)


def _check_support(cfg: ExperimentConfig, grid: Grid):
    p = cfg.perturbation
    reach = SUPPORT_SIGMAS * p.width
    lo, hi = grid.x_extent
    buf = BUFFER_FRACTION * (hi - lo)
    if p.center[0] - reach < lo + buf or p.center[0] + reach > hi - buf:
        raise ConfigError(
            f"perturbation: support [{p.center[0] - reach:g}, {p.center[0] + reach:g}] "
            f"must stay {buf:g} inside the x boundaries [{lo:g}, {hi:g}]")
    if grid.dim == 2 and p.kind != "transverse_sine":
        ylo, yhi = grid.y_extent
        if p.center[1] - reach <= ylo or p.center[1] + reach >= yhi:
            raise ConfigError("perturbation: support touches the transverse boundary")


def build_initial_data(cfg: ExperimentConfig) -> FieldSnapshot:
    """Exact background at t0 plus the configured compactly supported perturbation."""
    gas = make_gas(cfg)
    bg = make_background(cfg, gas)
    grid = make_grid(cfg)
    base = evaluate_on_grid(bg, grid, cfg.t0)
    p = cfg.perturbation
    if p.amplitude == 0.0:
        return base
    _check_support(cfg, grid)
    rho, v = primitive_from_conserved(base.q)
    rho, v = rho.copy(), v.copy()
    x, y = grid.centers()
    dx = x - p.center[0]
    dy = (y - p.center[1]) if grid.dim == 2 else np.zeros_like(x)
    eps, sig = p.amplitude, p.width
    bump = _truncated_gaussian(dx**2 + dy**2, sig)
    if p.kind == "gaussian_density":
        if p.simple_wave:
            # keep v1 + 2c/(gamma-1) at its background value: a pure 1-wave
            h = 2.0 / (gas.gamma - 1.0)
            invariant = v[0] + h * sound_speed(gas, rho)
            rho = rho + eps * bump
            v[0] = invariant - h * sound_speed(gas, rho)
        else:
            rho = rho + eps * bump
    elif p.kind == "gaussian_velocity":
        if p.direction == "radial":
            # gradient of a Gaussian potential, |v~| peaks at eps on r = sigma
            scale = eps * math.exp(0.5) / sig * bump
            v[0] += scale * dx
            if grid.dim == 2:
                v[1] += scale * dy
        else:
            d = np.asarray(p.direction if p.direction is not None else [1.0] + [0.0] * (grid.dim - 1))
            d = d / np.linalg.norm(d)
            for a in range(grid.dim):
                v[a] += eps * d[a] * bump
    elif p.kind == "transverse_sine":
        ylo, yhi = grid.y_extent
        phase = 2.0 * np.pi * p.wavenumber * (y - ylo) / (yhi - ylo)
        rho = rho + eps * _truncated_gaussian(dx**2, sig) * np.sin(phase)
    elif p.kind == "vortical":
        # v = curl of a Gaussian stream function, peak speed eps
        scale = eps * math.exp(0.5) / sig * bump
        v[0] += -scale * dy
        v[1] += scale * dx
    return snapshot_from_primitive(grid, cfg.t0, rho, v)


def characteristic_crossing_time(gas: GasModel, snap: FieldSnapshot) -> float:
    """-1/min d(lambda_1)/dx1 from the data; inf when nothing is compressive."""
    rho, v = primitive_from_conserved(snap.q)
    lam = v[0] - sound_speed(gas, rho)
    dlam = derivative(lam, snap.grid.dx, 0, 1, False)
    m = float(np.min(dlam))
    return math.inf if m >= 0.0 else -1.0 / m


# ---------------------------------------------------------------------------
# report

@dataclass
class ExperimentReport:
    config: dict
    output_dir: str
    timeseries_path: str
    decay_fit: DecayFit | None
    bootstrap: dict
    checks: dict
    timings: dict
    metrics: dict = field(default_factory=dict)
    files: list = field(default_factory=list)
    complete: bool = True
    reports: list = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def summary(self) -> dict:
        fit = None if self.decay_fit is None else dataclasses.asdict(self.decay_fit)
        return {"config": self.config, "decay_fit": fit, "bootstrap": self.bootstrap,
                "checks": self.checks, "timings": self.timings, "metrics": self.metrics,
                "complete": self.complete, "files": self.files}


def _check(passed, value, threshold) -> dict:
    return {"passed": bool(passed), "value": value, "threshold": threshold}


def resolve_output_dir(cfg: ExperimentConfig, output_dir=None) -> Path:
    if output_dir is not None:
        return Path(output_dir)
    return Path(os.environ.get("RAREFAN_OUT") or cfg.output_dir)


# ---------------------------------------------------------------------------
# convergence study

def convergence_study(cfg: ExperimentConfig, gas, bg, scfg) -> tuple[list[float], list[float]]:
    """L1 error (sum over primitive components) of the unperturbed fan at t_end per resolution."""
    lo, hi = cfg.grid.x_range
    dxs, errs = [], []
    for r in cfg.refinement:
        nx = int(round(r * (hi - lo)))
        grid = Grid.from_extent(cfg.grid.x_range, nx)
        start = evaluate_on_grid(bg, grid, cfg.t0)
        final = run(gas, start, scfg, cfg.t_end, background=bg)[-1].snapshot
        exact = evaluate_on_grid(bg, grid, cfg.t_end)
        r1, v1 = primitive_from_conserved(final.q)
        r0, v0 = primitive_from_conserved(exact.q)
        err = (float(np.sum(np.abs(r1 - r0))) + float(np.sum(np.abs(v1 - v0)))) * grid.cell_volume
        dxs.append(grid.dx)
        errs.append(err)
    return dxs, errs


# ---------------------------------------------------------------------------
# main entry

def run_experiment(cfg: ExperimentConfig, output_dir=None) -> ExperimentReport:
    """Run ``cfg``, write time series / summary / dumps / plots, and evaluate its checks."""
    wall0 = time.perf_counter()
    out = resolve_output_dir(cfg, output_dir)
    out.mkdir(parents=True, exist_ok=True)
    gas = make_gas(cfg)
    bg = make_background(cfg, gas)
    scfg = make_solver_config(cfg)
    initial = build_initial_data(cfg)
    grid = initial.grid
    dcfg = cfg.diagnostics
    periodic = (scfg.boundary == "periodic", True)
    ws = WeightSchedule(max_order=dcfg.max_order)

    twin_grid = grid if grid.dim == 1 else dataclasses.replace(grid, ny=4, dy=grid.dy * grid.ny / 4)
    state = {
        "twin": evaluate_on_grid(bg, twin_grid, cfg.t0),
        "ek": eikonal_init(grid, cfg.t0, periodic) if dcfg.eikonal else None,
        "grad_integral": 0.0,
        "grad_prev": velocity_gradient_norm(initial, periodic) if dcfg.vorticity else 0.0,
        "residual_max": 0.0,
        "steps": 0,
    }

    def on_step(old: FieldSnapshot, new: FieldSnapshot, dt: float):
        state["steps"] += 1
        if dcfg.reference == "twin":
            state["twin"] = step(gas, state["twin"], dt, scfg, bg)
        if state["ek"] is not None:
            ek_old = state["ek"]
            state["ek"] = eikonal_step(gas, old, ek_old, dt, new)
            res = np.abs(eikonal_residual(gas, new, ek_old, state["ek"]))
            state["residual_max"] = max(state["residual_max"], float(np.max(res)))
        if dcfg.vorticity:
            gn = velocity_gradient_norm(new, periodic)
            state["grad_integral"] += 0.5 * (state["grad_prev"] + gn) * dt
            state["grad_prev"] = gn

    extras: list[dict] = []

    def observe(snap: FieldSnapshot) -> EnergyReport:
        t = snap.time
        if dcfg.reference == "twin":
            ref = state["twin"]
        else:
            ref = evaluate_on_grid(bg, grid, t)
        pert = perturbation(snap, ref)
        row: dict = {"t": t}
        chi_mu = float("nan")
        mu_eik = None
        if state["ek"] is not None:
            ek: EikonalField = state["ek"]
            diag = geometry_diagnostics(gas, snap, ek)
            summ = diag.summary()
            chi_mu = summ["chi_mu_ratio"]
            mu_eik = diag.mu
            row.update(summ)
            finite = np.isfinite(diag.trchi) & np.isfinite(diag.mu)
            scaled = np.abs(diag.trchi[finite]) * t / np.maximum(diag.mu[finite], diag.mu_clamp)
            row["trchi_t_over_mu_max"] = float(np.max(scaled)) if scaled.size else 0.0
            row["lapse_rel_error"] = _lapse_error(cfg, bg, grid, t, diag.mu)
        if dcfg.lapse_source == "eikonal":
            mu = np.nan_to_num(mu_eik, nan=0.0)
        else:
            mu = background_lapse_on_grid(bg, grid, t)
        rep = energy_report(ws, pert, mu, grid, t, periodic, dcfg.band_fraction, chi_mu)
        _, v = primitive_from_conserved(snap.q)
        row["dv1dx1_max"] = float(np.max(np.abs(derivative(v[0], grid.dx, 0, 1, periodic[0]))))
        if dcfg.vorticity:
            row["omega_absmax"] = float(np.max(np.abs(vorticity(snap, periodic))))
            row["grad_integral"] = state["grad_integral"]
        row["floor_hits"] = snap.floor_hits
        extras.append(row)
        return rep

    metrics: dict = {}
    t_end = cfg.t_end
    if "gradient_growth_min" in cfg.checks:
        t_star = characteristic_crossing_time(gas, initial)
        metrics["t_star"] = t_star
        t_end = min(t_end, cfg.t0 + t_star)
    times = observation_times(cfg.t0, t_end, cfg.observe_every)
    times = sorted(set(times) | {t for t in cfg.snapshot_times if t <= t_end})

    files: list[str] = []
    timeseries_path = out / "timeseries.csv"
    snapshot_targets = sorted(cfg.snapshot_times)
    dumps = []

    def dump(snap: FieldSnapshot):
        for ts in snapshot_targets:
            if abs(snap.time - ts) <= 1e-9 * max(1.0, ts):
                stem = f"snap_t{ts:08.4f}"
                io.write_snapshot(out / f"{stem}.rfan", snap)
                io.write_snapshot_csv(out / f"{stem}.csv", snap)
                dumps.extend([f"{stem}.rfan", f"{stem}.csv"])
                if state["ek"] is not None:
                    diag = geometry_diagnostics(gas, snap, state["ek"])
                    fields = {"u": state["ek"].u, "mu": diag.mu, "trchi": diag.trchi}
                    if diag.omega is not None:
                        fields["omega"] = diag.omega
                    io.write_fields(out / f"fields_t{ts:08.4f}.rfan", grid, snap.time, fields)
                    dumps.extend([f"fields_t{ts:08.4f}.rfan", f"fields_t{ts:08.4f}.rfan.json"])
        return None

    complete = True
    reports: list[EnergyReport] = []
    try:
        records = run(gas, initial, scfg, t_end, observers=[observe, dump], background=bg,
                      on_step=on_step, times=times)
        reports = [r.values[0] for r in records]
    except SolverAbort as exc:
        complete = False
        _write_partial(out, cfg, exc)
        raise

    # bootstrap monitor
    eps0 = dcfg.eps0 if dcfg.eps0 is not None else math.sqrt(reports[0].total)
    boot = bootstrap_check(reports, dcfg.C0, eps0, grid.dim)
    for r, f in zip(reports, boot.flags):
        r.flags = f
    fit = decay_fit([r.time for r in reports], [r.linf for r in reports])
    metrics["eps0"] = eps0
    metrics["eikonal_residual_max"] = state["residual_max"]
    metrics["floor_hits"] = extras[-1]["floor_hits"]

    io.write_timeseries(timeseries_path, reports, dcfg.max_order)
    files.append(timeseries_path.name)
    files.extend(dumps)
    _write_extras(out / "observations.csv", extras)
    files.append("observations.csv")

    # convergence study
    if cfg.refinement:
        dxs, errs = convergence_study(cfg, gas, bg, scfg)
        metrics["convergence"] = {"dx": dxs, "l1_error": errs,
                                  "ratios": [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]}
        with open(out / "convergence.csv", "w") as fh:
            fh.write("dx,l1_error\n")
            for d, e in zip(dxs, errs):
                fh.write(f"{io.fmt(d)},{io.fmt(e)}\n")
        files.append("convergence.csv")

    checks = evaluate_checks(cfg, reports, extras, boot, fit, metrics)

    if cfg.plots:
        t = [r.time for r in reports]
        plotting.plot_energy(out / "energy.svg", t, [r.total for r in reports])
        plotting.plot_linf(out / "linf.svg", t, [r.linf for r in reports],
                           [r.linf_grad for r in reports], None if fit is None else fit.alpha)
        files.extend(["energy.svg", "linf.svg"])
        if cfg.refinement:
            plotting.plot_convergence(out / "convergence.svg", metrics["convergence"]["dx"],
                                      metrics["convergence"]["l1_error"])
            files.append("convergence.svg")

    wall = time.perf_counter() - wall0
    report = ExperimentReport(
        config=cfg.to_dict(), output_dir=str(out), timeseries_path=str(timeseries_path),
        decay_fit=fit, bootstrap=boot.as_dict(), checks=checks,
        timings={"steps": state["steps"], "observations": len(reports),
                 "wall_clock_file": "wallclock.json"},
        metrics=_jsonable(metrics), files=files, complete=complete, reports=reports)
    (out / "summary.json").write_text(json.dumps(_jsonable(report.summary()), indent=2, sort_keys=True) + "\n")
    (out / "wallclock.json").write_text(json.dumps({"seconds": wall}) + "\n")
    return report


def _lapse_error(cfg, bg: BackgroundWave, grid: Grid, t: float, mu: np.ndarray) -> float:
    """Max relative deviation of the measured lapse from the closed form on the fan interior."""
    margin = cfg.checks.get("lapse_fan_margin", 0.1)
    xi = grid.centers()[0] / t
    inside = (xi - bg.xi_minus >= margin * bg.width) & (xi <= bg.xi_plus)
    if bg.width <= 0.0 or not np.any(inside):
        return float("nan")
    ref = background_lapse_on_grid(bg, grid, t)
    rel = np.abs(mu[inside] / ref[inside] - 1.0)
    return float(np.nanmax(rel))


def evaluate_checks(cfg: ExperimentConfig, reports, extras, boot, fit, metrics) -> dict:
    c = cfg.checks
    out: dict = {}
    if "convergence_ratio_min" in c and "convergence" in metrics:
        ratios = metrics["convergence"]["ratios"]
        out["convergence_ratio"] = _check(min(ratios) >= c["convergence_ratio_min"], min(ratios),
                                          c["convergence_ratio_min"])
    if "finest_error_max" in c and "convergence" in metrics:
        e = metrics["convergence"]["l1_error"][-1]
        out["finest_error"] = _check(e <= c["finest_error_max"], e, c["finest_error_max"])
    if "lapse_rel_error_max" in c:
        lo, hi = c.get("lapse_window", [cfg.t0, cfg.t_end])
        vals = [x["lapse_rel_error"] for x in extras if lo - 1e-12 <= x["t"] <= hi + 1e-12
                and "lapse_rel_error" in x]
        v = max(vals) if vals else float("nan")
        out["lapse_match"] = _check(bool(vals) and v <= c["lapse_rel_error_max"], v,
                                    c["lapse_rel_error_max"])
    if "energy_growth_max" in c:
        e0 = reports[0].total
        emax = max(r.total for r in reports)
        ok = emax <= c["energy_growth_max"] * e0
        out["energy_bounded"] = _check(ok, emax / e0 if e0 > 0 else float("nan"), c["energy_growth_max"])
    if c.get("bootstrap"):
        fv = boot.first_violation
        out["bootstrap"] = _check(boot.passed, None if fv is None else f"{fv[0]}@t={fv[1]:.6g}", "BA1-BA3")
    if "decay_ratio_max" in c:
        ratio = reports[-1].linf / reports[0].linf if reports[0].linf > 0 else float("nan")
        out["decay_ratio"] = _check(ratio <= c["decay_ratio_max"], ratio, c["decay_ratio_max"])
    if "alpha_range" in c:
        lo, hi = c["alpha_range"]
        a = None if fit is None else fit.alpha
        out["decay_exponent"] = _check(a is not None and lo <= a <= hi, a, [lo, hi])
    if "chi_mu_growth_max" in c:
        r0 = reports[0].chi_mu_ratio
        rmax = max(r.chi_mu_ratio for r in reports)
        ok = np.isfinite(rmax) and rmax <= c["chi_mu_growth_max"] * r0
        out["chi_mu_bounded"] = _check(ok, rmax / r0 if r0 > 0 else float("nan"), c["chi_mu_growth_max"])
    if "gradient_growth_min" in c:
        t_cross = cfg.t0 + metrics.get("t_star", math.inf)
        before = [x["dv1dx1_max"] for x in extras if x["t"] < t_cross]
        g0 = extras[0]["dv1dx1_max"]
        growth = max(before) / g0 if g0 > 0 else float("nan")
        metrics["gradient_growth"] = growth
        out["gradient_growth"] = _check(growth >= c["gradient_growth_min"], growth, c["gradient_growth_min"])
    if "vorticity_slack" in c:
        w0 = extras[0]["omega_absmax"]
        worst = 0.0
        for x in extras:
            env = w0 * math.exp(x["grad_integral"])
            worst = max(worst, x["omega_absmax"] / env if env > 0 else math.inf)
        out["vorticity_envelope"] = _check(worst <= c["vorticity_slack"], worst, c["vorticity_slack"])
    return out


def _write_extras(path, extras: list[dict]):
    keys: list[str] = []
    for row in extras:
        keys.extend(k for k in row if k not in keys)
    with open(path, "w") as fh:
        fh.write(",".join(keys) + "\n")
        for row in extras:
            fh.write(",".join(io.fmt(row.get(k, float("nan"))) for k in keys) + "\n")


def _write_partial(out: Path, cfg: ExperimentConfig, exc: SolverAbort):
    summary = {"config": cfg.to_dict(), "decay_fit": None, "bootstrap": None, "checks": {},
               "timings": {}, "complete": False,
               "error": {"message": str(exc), "time": exc.time, "cell": list(exc.cell)}}
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
