"""Command line front end: ``rarefan <subcommand> ...``.

Exit codes: 0 on success, 1 on invalid input (bad config, missing or malformed
file, out-of-domain state), 2 when the solver aborts on non-finite values.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .. import io
from ..background import background_lapse_on_grid, connect_right_state, evaluate_on_grid, lapse_background
from ..energy import WeightSchedule, energy_report, perturbation
from ..gas import DomainError, GasModel, PrimitiveState
from ..geometry import EikonalField, geometry_diagnostics, vorticity
from ..solver import SolverAbort
from .config import ConfigError, load_config, load_scenario

log = logging.getLogger("rarefan")

EXIT_OK, EXIT_INVALID, EXIT_ABORT = 0, 1, 2


def _add_fan_args(p: argparse.ArgumentParser):
    p.add_argument("--gamma", type=float, default=1.4, help="adiabatic exponent (> 1), default 1.4")
    p.add_argument("--A", type=float, default=None, help="pressure constant in p = A rho^gamma, default 1/gamma")
    p.add_argument("--left-rho", type=float, default=1.0, help="density of the left state U-, default 1")
    p.add_argument("--left-v", type=float, nargs="+", default=[0.0],
                   help="velocity of the left state U- (1 or 2 components), default 0")
    p.add_argument("--xi-plus", type=float, default=-0.5,
                   help="target 1-characteristic speed of the right state, default -0.5")


def _fan_from_args(args, dim: int | None = None):
    gas = GasModel(args.gamma, args.A)
    v = list(args.left_v)
    if dim is not None:
        v = v + [0.0] * (dim - len(v))
    return gas, connect_right_state(gas, PrimitiveState(args.left_rho, tuple(v)), args.xi_plus)


def _fan_from_config(path):
    from .experiment import make_background, make_gas
    cfg = load_config(path)
    gas = make_gas(cfg)
    return cfg, gas, make_background(cfg, gas)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rarefan", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("background", help="tabulate the exact fan profile and background lapse")
    _add_fan_args(p)
    p.add_argument("--t", type=float, default=1.0, help="time at which the lapse is evaluated (> 0), default 1")
    p.add_argument("--samples", type=int, default=11,
                   help="number of equispaced xi samples across [xi-, xi+], default 11")
    p.add_argument("--xi", type=float, nargs="+", default=None,
                   help="explicit xi values to sample instead of the equispaced table")
    p.add_argument("--out", default=None, help="write the CSV here instead of stdout")
    p.add_argument("--plot", default=None, help="also write an SVG profile plot to this path")

    p = sub.add_parser("simulate", help="run an experiment config or canned scenario")
    p.add_argument("config", help="path to a JSON config, or the name of a shipped scenario")
    p.add_argument("--out", default=None,
                   help="output directory (overrides RAREFAN_OUT and the config's output_dir)")
    p.add_argument("--strict", action="store_true", help="exit 1 when any configured check fails")

    p = sub.add_parser("geometry", help="recompute geometric diagnostics from a snapshot dump")
    p.add_argument("--snapshot", required=True, help="fluid snapshot (.rfan)")
    p.add_argument("--fields", default=None,
                   help="field dump (.rfan with .json manifest) holding the eikonal channel 'u'")
    p.add_argument("--gamma", type=float, default=1.4, help="adiabatic exponent, default 1.4")
    p.add_argument("--A", type=float, default=None, help="pressure constant, default 1/gamma")
    p.add_argument("--out", default=None, help="write mu/trchi/omega fields to this .rfan path")

    p = sub.add_parser("energy", help="recompute the weighted energy series from snapshot dumps")
    p.add_argument("--snapshot", required=True, nargs="+", help="one or more fluid snapshots (.rfan)")
    p.add_argument("--order", type=int, default=3, help="highest derivative order s (0..4), default 3")
    p.add_argument("--config", default=None, help="take the gas and fan from this experiment config")
    _add_fan_args(p)
    p.add_argument("--out", default=None, help="write the CSV here instead of stdout")

    p = sub.add_parser("report", help="aggregate pass/fail across finished runs")
    p.add_argument("dirs", nargs="+", help="run output directories containing summary.json")
    p.add_argument("--strict", action="store_true", help="exit 1 unless every check passed")
    return ap


# ---------------------------------------------------------------------------
# subcommands

def _open_out(path):
    return open(path, "w", newline="") if path else sys.stdout


def cmd_background(args) -> int:
    gas, bg = _fan_from_args(args)
    if args.t <= 0:
        raise DomainError("--t must be positive")
    if args.xi is not None:
        xi = np.asarray(args.xi, dtype=float)
    else:
        if args.samples < 1:
            raise ValueError("--samples must be >= 1")
        xi = np.linspace(bg.xi_minus, bg.xi_plus, args.samples)
    rho, v = bg.sample_arrays(xi)
    mu = lapse_background(bg, args.t, xi)
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["xi", "rho", "v1", "mu"])
        for row in zip(xi, rho, v[0], mu):
            w.writerow([io.fmt(a) for a in row])
    finally:
        if fh is not sys.stdout:
            fh.close()
    if args.plot:
        from .plotting import plot_profile
        plot_profile(args.plot, xi, rho, v[0], mu)
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .experiment import run_experiment
    target = args.config
    if Path(target).suffix == ".json" or os.sep in target or Path(target).exists():
        cfg = load_config(target)
    else:
        cfg = load_scenario(target)
    rep = run_experiment(cfg, args.out)
    print(f"{cfg.name}: output in {rep.output_dir}")
    for name, c in rep.checks.items():
        print(f"  {name:22s} {'PASS' if c['passed'] else 'FAIL'}  value={c['value']}  threshold={c['threshold']}")
    if args.strict and not rep.passed:
        return EXIT_INVALID
    return EXIT_OK


def cmd_geometry(args) -> int:
    gas = GasModel(args.gamma, args.A)
    snap = io.read_snapshot(args.snapshot)
    out: dict = {"time": snap.time}
    fields: dict = {}
    if snap.grid.dim == 2:
        omega = vorticity(snap)
        out["omega_absmax"] = float(np.max(np.abs(omega)))
        fields["omega"] = omega
    if args.fields:
        grid, t, chans = io.read_fields(args.fields)
        if "u" not in chans:
            raise ValueError(f"{args.fields}: no 'u' channel")
        if grid.shape != snap.grid.shape:
            raise ValueError("field dump and snapshot grids differ")
        diag = geometry_diagnostics(gas, snap, EikonalField(snap.grid, t, chans["u"]))
        out.update(diag.summary())
        fields.update({"mu": diag.mu, "trchi": diag.trchi})
    print(json.dumps(out, indent=2, sort_keys=True))
    if args.out and fields:
        io.write_fields(args.out, snap.grid, snap.time, fields)
    return EXIT_OK


def cmd_energy(args) -> int:
    snaps = sorted((io.read_snapshot(p) for p in args.snapshot), key=lambda s: s.time)
    dim = snaps[0].grid.dim
    if args.config:
        _, _, bg = _fan_from_config(args.config)
    else:
        _, bg = _fan_from_args(args, dim)
    ws = WeightSchedule(max_order=args.order)
    reports = []
    for s in snaps:
        ref = evaluate_on_grid(bg, s.grid, s.time)
        mu = background_lapse_on_grid(bg, s.grid, s.time)
        reports.append(energy_report(ws, perturbation(s, ref), mu, s.grid, s.time))
    fh = _open_out(args.out)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(io.timeseries_header(args.order))
        w.writerows(io.timeseries_rows(reports))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_report(args) -> int:
    all_ok = True
    for d in args.dirs:
        path = Path(d) / "summary.json"
        if not path.is_file():
            raise FileNotFoundError(f"no summary.json in {d}")
        summ = json.loads(path.read_text())
        name = summ.get("config", {}).get("name", d)
        checks = summ.get("checks", {})
        complete = summ.get("complete", True)
        ok = complete and all(c["passed"] for c in checks.values())
        all_ok &= ok
        print(f"{name}: {'PASS' if ok else 'FAIL'}{'' if complete else ' (incomplete)'}")
        for cname, c in checks.items():
            print(f"  {cname:22s} {'PASS' if c['passed'] else 'FAIL'}  value={c['value']}")
    return EXIT_INVALID if args.strict and not all_ok else EXIT_OK


COMMANDS = {"background": cmd_background, "simulate": cmd_simulate, "geometry": cmd_geometry,
            "energy": cmd_energy, "report": cmd_report}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except SolverAbort as exc:
        print(f"error: solver aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ConfigError, DomainError, io.FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
