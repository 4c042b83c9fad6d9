"""Experiment configuration: JSON schema, defaults and validation."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any

PERTURBATION_KINDS = ("gaussian_density", "gaussian_velocity", "transverse_sine", "vortical")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


@dataclass
class GasSpec:
    gamma: float = 1.4
    A: float | None = None


@dataclass
class FanSpec:
    left_rho: float = 1.0
    left_v: list[float] = field(default_factory=lambda: [0.0])
    xi_plus: float = -0.5


@dataclass
class GridSpec:
    dim: int = 1
    nx: int = 400
    x_range: list[float] = field(default_factory=lambda: [-3.0, 1.0])
    ny: int = 1
    y_range: list[float] | None = None


@dataclass
class SolverSpec:
    cfl: float = 0.45
    limiter: str = "minmod"
    boundary: str = "background"
    flux: str = "rusanov"
    rho_floor: float = 1e-10


@dataclass
class PerturbationSpec:
    kind: str = "gaussian_density"
    amplitude: float = 0.0
    center: list[float] = field(default_factory=lambda: [0.0, 0.0])
    width: float = 0.25
    wavenumber: int = 1
    # gaussian_velocity: a unit vector, or "radial" for an irrotational pulse
    direction: Any = None
    # gaussian_density: adjust v1 so only the 1-family is excited
    simple_wave: bool = False


@dataclass
class DiagnosticsSpec:
    energy: bool = True
    eikonal: bool = False
    vorticity: bool = False
    max_order: int = 3
    lapse_source: str = "background"  # or "eikonal"
    reference: str = "twin"  # or "exact"
    C0: float = 10.0
    eps0: float | None = None
    band_fraction: float = 0.05


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    gas: GasSpec = field(default_factory=GasSpec)
    fan: FanSpec = field(default_factory=FanSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    solver: SolverSpec = field(default_factory=SolverSpec)
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    diagnostics: DiagnosticsSpec = field(default_factory=DiagnosticsSpec)
    t0: float = 1.0
    t_end: float = 2.0
    observe_every: float = 0.25
    snapshot_times: list[float] = field(default_factory=list)
    refinement: list[int] = field(default_factory=list)
    checks: dict[str, Any] = field(default_factory=dict)
    output_dir: str = "rarefan_out"
    plots: bool = True
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {
    "gas": GasSpec, "fan": FanSpec, "grid": GridSpec, "solver": SolverSpec,
    "perturbation": PerturbationSpec, "diagnostics": DiagnosticsSpec,
}

KNOWN_CHECKS = {
    "convergence_ratio_min", "finest_error_max", "lapse_rel_error_max", "lapse_window",
    "lapse_fan_margin", "energy_growth_max", "bootstrap", "decay_ratio_max", "alpha_range",
    "chi_mu_growth_max", "gradient_growth_min", "vorticity_slack",
}


def _build(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key {unknown[0]!r}")
    kwargs = {}
    for k, v in data.items():
        if cls is ExperimentConfig and k in _SECTIONS:
            v = _build(_SECTIONS[k], v, k)
        kwargs[k] = v
    return cls(**kwargs)


def _require(cond: bool, key: str, msg: str):
    if not cond:
        raise ConfigError(f"{key}: {msg}")


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check every invariant; raises :class:`ConfigError` naming the field."""
    _require(cfg.gas.gamma > 1.0, "gas.gamma", "must exceed 1")
    _require(cfg.gas.A is None or cfg.gas.A > 0.0, "gas.A", "must be positive")
    _require(cfg.fan.left_rho > 0.0, "fan.left_rho", "must be positive")
    g = cfg.grid
    _require(g.dim in (1, 2), "grid.dim", "must be 1 or 2")
    _require(len(cfg.fan.left_v) in (1, g.dim), "fan.left_v", f"needs 1 or {g.dim} components")
    _require(g.nx >= 4, "grid.nx", "must be >= 4")
    _require(len(g.x_range) == 2 and g.x_range[1] > g.x_range[0], "grid.x_range", "must be [lo, hi] with lo < hi")
    if g.dim == 2:
        _require(g.ny >= 4, "grid.ny", "must be >= 4")
        _require(g.y_range is not None and len(g.y_range) == 2 and g.y_range[1] > g.y_range[0],
                 "grid.y_range", "must be [lo, hi] with lo < hi")
    else:
        _require(g.ny == 1, "grid.ny", "must be 1 for 1D grids")
    s = cfg.solver
    _require(0.0 < s.cfl <= 1.0, "solver.cfl", "must lie in (0, 1]")
    _require(s.limiter in ("minmod", "none"), "solver.limiter", "must be 'minmod' or 'none'")
    _require(s.boundary in ("background", "periodic", "outflow"), "solver.boundary", "unknown policy")
    _require(s.flux in ("rusanov", "hll"), "solver.flux", "must be 'rusanov' or 'hll'")
    _require(s.rho_floor > 0.0, "solver.rho_floor", "must be positive")
    p = cfg.perturbation
    _require(p.kind in PERTURBATION_KINDS, "perturbation.kind", f"must be one of {PERTURBATION_KINDS}")
    _require(p.amplitude >= 0.0, "perturbation.amplitude", "must be >= 0")
    _require(p.width > 0.0, "perturbation.width", "must be positive")
    _require(len(p.center) >= g.dim, "perturbation.center", f"needs {g.dim} coordinates")
    _require(isinstance(p.wavenumber, int) and p.wavenumber >= 1, "perturbation.wavenumber", "must be a positive integer")
    if p.kind in ("transverse_sine", "vortical"):
        _require(g.dim == 2, "perturbation.kind", f"{p.kind} needs a 2D grid")
    if p.direction is not None and p.direction != "radial":
        _require(isinstance(p.direction, list) and len(p.direction) == g.dim,
                 "perturbation.direction", f"must be 'radial' or a {g.dim}-vector")
    d = cfg.diagnostics
    _require(d.max_order >= 0 and d.max_order <= 4, "diagnostics.max_order", "must lie in 0..4")
    _require(d.lapse_source in ("background", "eikonal"), "diagnostics.lapse_source", "must be 'background' or 'eikonal'")
    _require(d.reference in ("twin", "exact"), "diagnostics.reference", "must be 'twin' or 'exact'")
    _require(d.lapse_source != "eikonal" or d.eikonal, "diagnostics.lapse_source", "'eikonal' needs diagnostics.eikonal")
    _require(d.vorticity is False or g.dim == 2, "diagnostics.vorticity", "needs a 2D grid")
    _require(d.C0 > 0.0, "diagnostics.C0", "must be positive")
    _require(d.eps0 is None or d.eps0 >= 0.0, "diagnostics.eps0", "must be >= 0")
    _require(d.band_fraction > 0.0, "diagnostics.band_fraction", "must be positive")
    _require(cfg.t0 >= 1.0, "t0", "must be >= 1")
    _require(cfg.t_end > cfg.t0, "t_end", f"must exceed t0={cfg.t0}")
    _require(cfg.observe_every > 0.0, "observe_every", "must be positive")
    _require(all(cfg.t0 <= t <= cfg.t_end for t in cfg.snapshot_times), "snapshot_times", "must lie in [t0, t_end]")
    _require(all(isinstance(r, int) and r > 0 for r in cfg.refinement), "refinement", "must be positive integers (cells per unit length)")
    unknown = sorted(set(cfg.checks) - KNOWN_CHECKS)
    _require(not unknown, "checks", f"unknown check {unknown[0]!r}" if unknown else "")
    return cfg


def config_from_dict(data: dict) -> ExperimentConfig:
    return validate(_build(ExperimentConfig, data, "config"))


def load_config(path) -> ExperimentConfig:
    """Read, parse and validate a JSON config file.

    A run's ``summary.json`` is accepted too; its embedded config is used.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {str(path)!r}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if isinstance(data, dict) and isinstance(data.get("config"), dict) and "complete" in data:
        data = data["config"]
    try:
        return config_from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def write_config(cfg: ExperimentConfig, path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")


def scenario_names() -> list[str]:
    root = resources.files("rarefan.harness") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_scenario(name: str) -> ExperimentConfig:
    """Load a canned scenario shipped with the package."""
    root = resources.files("rarefan.harness") / "scenarios"
    res = root / f"{name}.json"
    if not res.is_file():
        raise ConfigError(f"unknown scenario {name!r}; available: {', '.join(scenario_names())}")
    with resources.as_file(res) as p:
        return load_config(p)
