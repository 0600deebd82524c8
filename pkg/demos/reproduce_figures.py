"""
Draw figures 1-10 of the magnesium deformed atom with matplotlib.

    python3 demos/reproduce_figures.py [--out figures] [--only 7 8]

Each figure is computed through the library API; the same numbers are
available as CSV/JSON from the ``deformed-atom`` command (see README).
"""

import argparse
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from deformed_atom.dynamics import banana_state, equilibrium_state, integrate, small_loop_state
from deformed_atom.equilibrium import solve_equilibrium
from deformed_atom.params import magnesium_preset
from deformed_atom.quantum import localized_density
from deformed_atom.stability import linearize, normal_modes, slow_period, spectrum_at, stability_threshold

MG = magnesium_preset()
OMEGAS = np.linspace(0.0005, 0.10, 200)


def fig1(ax):
    ax.plot(OMEGAS, [solve_equilibrium(MG, w).delta for w in OMEGAS])
    ax.set(xlabel="omega (a.u.)", ylabel="delta", title="core offset relative to electron radius")


def fig2(ax):
    cfgs = [solve_equilibrium(MG, w) for w in OMEGAS]
    ax.semilogy(OMEGAS, [c.x1 for c in cfgs], label="x1 (electron)")
    ax.semilogy(OMEGAS, [c.x2 for c in cfgs], label="x2 (core)")
    ax.set(xlabel="omega (a.u.)", ylabel="distance (bohr)")
    ax.legend()


def _scan():
    ws = np.linspace(0.001, stability_threshold(MG) * 0.999, 150)
    return ws, [spectrum_at(MG, w) for w in ws]


def fig3(ax):
    ws, spectra = _scan()
    for i, name in enumerate(("w1", "w2", "w3"), start=1):
        ax.plot(ws, [s.omega_xy[i] for s in spectra], label=name)
    ax.set(xlabel="omega (a.u.)", ylabel="frequency (a.u.)", title="in-plane modes")
    ax.legend()


def fig4(ax):
    ws, spectra = _scan()
    for i, name in enumerate(("w4", "w5")):
        ax.plot(ws, [s.omega_z[i] for s in spectra], label=name)
    ax.set(xlabel="omega (a.u.)", ylabel="frequency (a.u.)", title="axial modes")
    ax.legend()


def _ellipses(ax, modes, core_scale):
    for mode in modes:
        t = np.linspace(0, 2 * math.pi / mode.frequency, 400)
        e, c = mode.path(t)
        line, = ax.plot(e[:, 0], e[:, 1], label=f"electron, {mode.frequency:.3f}")
        ax.plot(core_scale * c[:, 0], core_scale * c[:, 1], "--", color=line.get_color(),
                label=f"core x{core_scale:g}")
    ax.set_aspect("equal")
    ax.legend(fontsize="small")


def fig5(ax):
    modes = normal_modes(linearize(MG, solve_equilibrium(MG, 0.06)))
    _ellipses(ax, modes[:1], core_scale=10)
    ax.set_title("slow mode at omega = 0.06")


def fig6(ax):
    modes = normal_modes(linearize(MG, solve_equilibrium(MG, 0.06)))
    _ellipses(ax, modes[1:], core_scale=1)
    ax.set_title("fast modes at omega = 0.06")


def _orbit(fig, state, title):
    w = 0.048
    eq = equilibrium_state(MG, w)
    tr = integrate(MG, state, w, slow_period(MG, w), n_samples=2000)
    left, right = fig.subplots(1, 2)
    left.plot(tr.core[:, 0], tr.core[:, 1], lw=0.5, color="C1")
    left.plot(*eq.R[:2], "k.")
    left.set(title="core", xlabel="x (bohr)", ylabel="y (bohr)", aspect="equal")
    right.plot(tr.electron[:, 0], tr.electron[:, 1])
    right.plot(*eq.r[:2], "k.")
    right.set(title="electron", xlabel="x (bohr)", aspect="equal")
    fig.suptitle(f"{title}, omega = {w} (energy drift {tr.energy_drift:.1e})")


def fig7(fig):
    _orbit(fig, small_loop_state(MG, 0.048), "small oscillations")


def fig8(fig):
    _orbit(fig, banana_state(MG, 0.048), "banana orbit")


def _density(fig, n):
    left, right = fig.subplots(1, 2)
    line = localized_density(n, "-", plane="x")
    left.plot(line.x, line.effective)
    left.set(xlabel="x (bohr)", ylabel="r^2 rho")
    grid = localized_density(n, "-", plane="xy")
    right.contour(grid.x, grid.y, grid.values, levels=12)
    right.plot(0, 0, "k.")
    right.set(xlabel="x (bohr)", ylabel="y (bohr)", aspect="equal")
    fig.suptitle(f"lower localized state, n = {n}")


FIGURES = {1: fig1, 2: fig2, 3: fig3, 4: fig4, 5: fig5, 6: fig6, 7: fig7, 8: fig8,
           9: lambda f: _density(f, 5), 10: lambda f: _density(f, 6)}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--out", default="figures")
    parser.add_argument("--only", type=int, nargs="*", default=sorted(FIGURES))
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for num in args.only:
        if num in (7, 8, 9, 10):
            fig = plt.figure(figsize=(10, 4.5))
            FIGURES[num](fig)
        else:
            fig, ax = plt.subplots(figsize=(6, 4.5))
            FIGURES[num](ax)
        path = out / f"fig{num:02d}.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        print(path)


if __name__ == "__main__":
    main()
