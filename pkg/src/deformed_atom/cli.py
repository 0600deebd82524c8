"""
Command-line front end: ``deformed-atom <command> [options]``.

Every command writes plain data (CSV or JSON) to ``--output`` or stdout.
Floats in CSV are written with 17 significant digits; JSON uses Python's
shortest round-trip representation, so repeated runs are byte-identical.

Options may also come from a JSON file given with ``--config``; keys are
the long option names with dashes replaced by underscores, plus an
optional ``command``. Flags on the command line override the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from . import dynamics, equilibrium, quantum, stability
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateModeError,
    DomainError,
    IntegrationError,
)
from .params import PRESETS, AtomModel, core_energy_ev, k_from_polarizability, load_model

MODEL_ENV = "DEFORMED_ATOM_MODEL"

_FAILURES = (DomainError, ConvergenceError, ConsistencyError, IntegrationError, DegenerateModeError, ValueError, OSError)


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def parse_range(text) -> np.ndarray:
    """``start:stop:count`` with both endpoints included, or a single number."""
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    if isinstance(text, (int, float)):
        return np.array([float(text)])
    parts = str(text).split(":")
    if len(parts) == 1:
        return np.array([float(parts[0])])
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"range must be start:stop:count, got {text!r}")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise argparse.ArgumentTypeError(f"range count must be at least 1, got {count}")
    return np.linspace(start, stop, count)


def parse_pair(text) -> tuple[float, float]:
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        vals = [float(v) for v in str(text).split(",")]
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return vals[0], vals[1]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def write_csv(header, rows, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(obj, out):
    json.dump(_jsonable(obj), out, indent=2, allow_nan=False)
    out.write("\n")


def resolve_model(args) -> AtomModel:
    if getattr(args, "model", None) and getattr(args, "preset", None):
        raise CliError("give either --preset or --model, not both")
    if getattr(args, "model", None):
        model = load_model(args.model)
    elif getattr(args, "preset", None):
        key = args.preset.lower()
        if key not in PRESETS:
            raise CliError(f"unknown preset {args.preset!r}; known: {', '.join(sorted(PRESETS))}")
        model = PRESETS[key]()
    elif os.environ.get(MODEL_ENV):
        model = load_model(os.environ[MODEL_ENV])
    else:
        model = PRESETS["mg"]()
    if getattr(args, "infinite_nucleus", False):
        model = model.with_infinite_nucleus()
    return model


def _map(fn, items, jobs: int):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# ---------------------------------------------------------------------------
# commands


def cmd_calibrate(args, out):
    model = resolve_model(args)
    if args.alpha_tilde is not None:
        Z = model.Z if args.Z is None else args.Z
        k = k_from_polarizability(Z, args.alpha_tilde)
        model = AtomModel(Z=Z, k=k, m_c=None if args.Z is not None else model.m_c, m_n=model.m_n)
    report = model.to_dict()
    report["core_energy_ev"] = core_energy_ev(model)
    report["omega_max"] = equilibrium.omega_validity_bound(model)
    write_json(report, out)


def _name_omega(w, exc):
    msg = str(exc)
    return DomainError(msg if "omega" in msg else f"omega={w!r}: {msg}")


def _equilibrium_row(w, model, finite_mass):
    try:
        if finite_mass:
            c = equilibrium.solve_equilibrium_finite_mass(model, w)
            res = float(np.max(np.abs(equilibrium.finite_mass_residuals(model, w, c.x1, c.x2))))
        else:
            c = equilibrium.solve_equilibrium(model, w)
            res = max(abs(r) for r in equilibrium.force_residuals(model, c)) if not c.degenerate else 0.0
    except (DomainError, ConvergenceError) as exc:
        raise _name_omega(w, exc) from exc
    return (w, c.delta, c.x1, c.x2, c.Mz, res)


def cmd_equilibrium_scan(args, out):
    model = resolve_model(args)
    omegas = [float(w) for w in parse_range(args.omega)]
    rows = _map(partial(_equilibrium_row, model=model, finite_mass=args.finite_mass), omegas, args.jobs)
    write_csv(["omega", "delta", "x1", "x2", "Mz", "residual"], rows, out)


def _stability_row(w, model, precision):
    try:
        sp = stability.spectrum_at(model, w, precision=precision)
    except DomainError as exc:
        raise _name_omega(w, exc) from exc
    _, w1, w2, w3 = sp.omega_xy
    w4, w5 = sp.omega_z
    return (w, w1, w2, w3, w4, w5, sp.stable)


def cmd_stability_scan(args, out):
    model = resolve_model(args)
    omegas = [float(w) for w in parse_range(args.omega)]
    rows = _map(partial(_stability_row, model=model, precision=args.precision), omegas, args.jobs)
    write_csv(["omega", "w1", "w2", "w3", "w4", "w5", "stable"], rows, out)


def cmd_threshold(args, out):
    model = resolve_model(args)
    wc = stability.stability_threshold(model, xtol=args.xtol)
    if args.format == "json":
        c = equilibrium.solve_equilibrium(model, wc)
        write_json({"omega_crit": wc, "delta": c.delta, "x1": c.x1, "x2": c.x2, "Mz": c.Mz}, out)
    else:
        out.write(fmt(wc) + "\n")


def cmd_modes(args, out):
    model = resolve_model(args)
    lin = stability.linearize(model, equilibrium.solve_equilibrium(model, args.omega))
    write_json([m.to_dict() for m in stability.normal_modes(lin)], out)


def cmd_orbit(args, out):
    model = resolve_model(args)
    w = args.omega
    s0 = dynamics.displaced_state(
        model,
        w,
        electron_displacement=parse_pair(args.displace_electron) if args.displace_electron is not None else None,
        core_displacement=parse_pair(args.displace_core) if args.displace_core is not None else None,
        electron_velocity=parse_pair(args.electron_velocity) if args.electron_velocity is not None else None,
        angular_momentum=args.angular_momentum,
    )
    if args.t_end is None:
        t_end = stability.slow_period(model.with_infinite_nucleus(), w) if model.standard_core_mass else None
        if t_end is None:
            raise CliError("--t-end is required for models with a non-standard core mass")
    else:
        t_end = args.t_end
    tr = dynamics.integrate(model, s0, w, t_end, tol=args.tol, n_samples=args.samples)
    rows = (
        (t, *y[0:3], *y[3:6], e, L)
        for t, y, e, L in zip(tr.t, tr.y, tr.energy, tr.Lz)
    )
    write_csv(["t", "xe", "ye", "ze", "xc", "yc", "zc", "energy", "Lz"], rows, out)


def cmd_quantum_levels(args, out):
    model = resolve_model(args)
    write_json(quantum.dipole_splitting(model, args.n).to_dict(), out)


def cmd_quantum_density(args, out):
    g = quantum.localized_density(
        args.n,
        sign=args.sign,
        frame=args.frame,
        t=args.t,
        plane=args.plane,
        extent=args.extent,
        resolution=args.resolution,
    )
    if g.plane == "xy":
        rows = ((g.x[j], g.y[i], g.values[i, j]) for i in range(g.resolution) for j in range(g.resolution))
        write_csv(["x", "y", "rho"], rows, out)
    else:
        write_csv(["x", "rho", "r2rho"], zip(g.x, g.values, g.effective), out)


def cmd_decay(args, out):
    model = resolve_model(args)
    write_json([ch.to_dict() for ch in quantum.decay_observables(model, args.n)], out)


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, model: bool = True):
    if model:
        p.add_argument("--preset", help="named model, e.g. mg")
        p.add_argument("--model", help="path to a model JSON file")
        p.add_argument("--infinite-nucleus", action="store_true", help="drop the finite nucleus mass")
    p.add_argument("--config", help="JSON file with default option values")
    p.add_argument("-o", "--output", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deformed-atom", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("calibrate", help="spring constant and core energy from a polarizability")
    _common(p)
    p.add_argument("--alpha-tilde", type=float, help="ion polarizability in bohr^3")
    p.add_argument("--Z", type=int, help="nuclear charge (with --alpha-tilde)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("equilibrium-scan", help="equilibrium configuration versus omega")
    _common(p)
    p.add_argument("--omega", required=True, help="start:stop:count")
    p.add_argument("--finite-mass", action="store_true", help="solve with the finite nucleus mass")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_equilibrium_scan)

    p = sub.add_parser("stability-scan", help="normal-mode frequencies versus omega")
    _common(p)
    p.add_argument("--omega", required=True, help="start:stop:count")
    p.add_argument("--precision", choices=("double", "extended"), default="double")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_stability_scan)

    p = sub.add_parser("threshold", help="rotation frequency where the equilibrium turns unstable")
    _common(p)
    p.add_argument("--xtol", type=float, default=1e-7)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("modes", help="normal-mode ellipses at one omega")
    _common(p)
    p.add_argument("--omega", type=float, required=True)
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("orbit", help="integrate the nonlinear equations of motion")
    _common(p)
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--displace-electron", help="dx,dy from equilibrium")
    p.add_argument("--displace-core", help="dx,dy from equilibrium")
    p.add_argument("--electron-velocity", help="vx,vy in the rotating frame")
    p.add_argument("--angular-momentum", type=float, help="fix total L_z via the electron's azimuthal momentum")
    p.add_argument("--t-end", type=float, help="end time (default: one slow-mode period)")
    p.add_argument("--tol", type=float, default=dynamics.DEFAULT_TOL)
    p.add_argument("--samples", type=int, help="number of output samples")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("quantum-levels", help="resonance frequency and dipole splitting")
    _common(p)
    p.add_argument("--n", type=int, default=5)
    p.set_defaults(func=cmd_quantum_levels)

    p = sub.add_parser("quantum-density", help="density of a localized superposition")
    _common(p, model=False)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--sign", choices=("+", "-"), default="-")
    p.add_argument("--frame", choices=("rotating", "lab"), default="rotating")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--plane", choices=("xy", "x"), default="xy")
    p.add_argument("--extent", type=float)
    p.add_argument("--resolution", type=int, default=200)
    p.set_defaults(func=cmd_quantum_density)

    p = sub.add_parser("decay", help="dipole decay channels of the lower localized state")
    _common(p)
    p.add_argument("--n", type=int, default=5)
    p.set_defaults(func=cmd_decay)
    return parser


def _find_config(argv):
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _apply_config(parser, argv):
    path = _find_config(argv)
    if path is None:
        return argv
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise CliError(f"config file {path} must hold a JSON object")
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = cfg.pop("command", None)
    names = set(sub_action.choices)
    given = next((a for a in argv if a in names), None)
    if given is None:
        if command is None:
            raise CliError("no command given on the command line or in the config file")
        argv = [command, *argv]
        given = command
    sp = sub_action.choices[given]
    known = {a.dest for a in sp._actions}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise CliError(f"unknown config keys for {given}: {', '.join(unknown)}")
    for a in sp._actions:
        if a.dest in cfg:
            a.required = False
    sp.set_defaults(**cfg)
    return argv


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
    except (CliError, OSError, json.JSONDecodeError) as exc:
        print(f"deformed-atom: error: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        return 2
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except (CliError, *_FAILURES, argparse.ArgumentTypeError) as exc:
        print(f"deformed-atom {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
