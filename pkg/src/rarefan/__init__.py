"""Barotropic Euler rarefaction fans: exact background, solver, acoustic geometry and energy diagnostics."""

from .background import (BackgroundWave, background_lapse_on_grid, connect_right_state,
                         evaluate_on_grid, lapse_background, sample)
from .energy import (BootstrapResult, DecayFit, EnergyReport, WeightSchedule, bootstrap_check,
                     decay_fit, energy_report, weighted_energy)
from .gas import (DomainError, GasModel, PrimitiveState, char_speeds, pressure,
                  riemann_invariants, sound_speed)
from .geometry import (EikonalField, NullFrame, eikonal_init, eikonal_step, metric_at,
                       null_frame_at, tr_chi, vorticity)
from .solver import FieldSnapshot, Grid, SolverAbort, SolverConfig, run, step

__version__ = "0.1.0"

__all__ = [
    "BackgroundWave", "BootstrapResult", "DecayFit", "DomainError", "EikonalField",
    "EnergyReport", "FieldSnapshot", "GasModel", "Grid", "NullFrame", "PrimitiveState",
    "SolverAbort", "SolverConfig", "WeightSchedule", "background_lapse_on_grid",
    "bootstrap_check", "char_speeds", "connect_right_state", "decay_fit", "eikonal_init",
    "eikonal_step", "energy_report", "evaluate_on_grid", "lapse_background", "metric_at",
    "null_frame_at", "pressure", "riemann_invariants", "run", "sample", "sound_speed", "step",
    "tr_chi", "vorticity", "weighted_energy",
]
