"""
Exit criteria of the toolkit, one test per criterion.

Run under pytest for a PASS/FAIL summary line per criterion, or directly
with ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time

import numpy as np
import pytest
from scipy.interpolate import CubicSpline

from deformed_atom.dynamics import (
    banana_state,
    equilibrium_state,
    integrate,
    normal_mode_state,
    small_loop_state,
)
from deformed_atom.equilibrium import (
    cubic_rhs,
    force_residuals,
    omega_validity_bound,
    solve_delta,
    solve_equilibrium,
    solve_equilibrium_finite_mass,
)
from deformed_atom.params import core_energy_ev, k_from_polarizability, magnesium_preset
from deformed_atom.quantum import (
    decay_observables,
    density_normalization,
    dipole_splitting,
    energy,
    interaction_matrix,
    localization_contrast,
    localized_density,
    radial_integral,
    radial_integral_quadrature,
)
from deformed_atom.stability import (
    linearize,
    normal_modes,
    slow_period,
    spectrum_at,
    stability_threshold,
)

pytestmark = pytest.mark.filterwarnings("error::RuntimeWarning")

MG = magnesium_preset()


def _bisect(Z, rhs):
    lo, hi = 0.0, 1.0
    f = lambda d: d**3 + 2 * d**2 + d / Z - rhs
    while f(hi) < 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if f(mid) > 0 else (mid, hi)
    return 0.5 * (lo + hi)


@pytest.mark.acceptance(1, title="calibration: k in [3.49, 3.50], core quantum 15.3 +- 0.1 eV")
def test_criterion_01_calibration():
    assert 3.49 <= k_from_polarizability(12, 34.62) <= 3.50
    assert core_energy_ev(MG) == pytest.approx(15.3, abs=0.1)


@pytest.mark.acceptance(2, title="equilibrium: x2(0.01125) = 0.0079 +- 2%, smooth monotone curves, residuals < 1e-10")
def test_criterion_02_equilibrium_regression():
    assert solve_equilibrium(MG, 0.01125).x2 == pytest.approx(0.0079, rel=0.02)
    start = time.perf_counter()
    ws = np.linspace(0.1 / 200, 0.1, 200)
    cfgs = [solve_equilibrium(MG, w) for w in ws]
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0
    delta = np.array([c.delta for c in cfgs])
    x1 = np.array([c.x1 for c in cfgs])
    x2 = np.array([c.x2 for c in cfgs])
    assert np.all(np.diff(delta) > 0)
    assert np.all(np.diff(x1) < 0)
    assert np.all(np.diff(x2) > 0)
    for c in cfgs:
        assert max(abs(r) for r in force_residuals(MG, c)) < 1e-10
    # smoothness: a spline through every other point predicts the rest
    lw = np.log(ws)
    for curve in (delta, x1, x2):
        spline = CubicSpline(lw[::2], np.log(curve[::2]))
        assert np.max(np.abs(spline(lw[1:-1:2]) - np.log(curve[1:-1:2]))) < 1e-4


@pytest.mark.acceptance(3, title="closed-form root equals bisection root to 1e-10 on 100 points")
def test_criterion_03_closed_form_equals_bisection():
    for w in np.linspace(omega_validity_bound(MG) / 100, omega_validity_bound(MG), 100):
        assert solve_delta(MG, w) == pytest.approx(_bisect(MG.Z, cubic_rhs(MG, w)), rel=1e-10)


@pytest.mark.acceptance(4, title="finite vs infinite nucleus: x1 differs by < 1e-3 relative")
def test_criterion_04_finite_nucleus():
    for w in (0.01125, 0.048, 0.06, 0.1):
        fin = solve_equilibrium_finite_mass(MG, w)
        inf = solve_equilibrium(MG, w)
        assert abs(fin.x1 - inf.x1) / inf.x1 < 1e-3


@pytest.mark.acceptance(5, title="spectrum at 0.06: w1 0.041, w2 0.506, w3 0.626 (+-2%); slow-rotation limit 0.5637 +-1%")
def test_criterion_05_spectrum():
    sp = spectrum_at(MG, 0.06)
    _, w1, w2, w3 = sp.omega_xy
    assert w2 == pytest.approx(0.506, rel=0.02)
    assert w3 == pytest.approx(0.626, rel=0.02)
    low = spectrum_at(MG, 1e-4)
    for f in (low.omega_xy[2], low.omega_xy[3], low.omega_z[1]):
        assert f == pytest.approx(0.5637, rel=0.01)
    assert w1 == pytest.approx(0.041, rel=0.02)


@pytest.mark.acceptance(6, title="threshold 0.1026 +-1%, delta 0.022 +-10%, Mz 2.8 +-5%, under 1 s")
def test_criterion_06_threshold():
    start = time.perf_counter()
    wc = stability_threshold(MG)
    assert time.perf_counter() - start < 1.0
    assert wc == pytest.approx(0.1026, rel=0.01)
    assert solve_equilibrium(MG, wc).delta == pytest.approx(0.022, rel=0.10)
    assert solve_equilibrium(MG, wc * (1 - 1e-4)).Mz == pytest.approx(2.8, rel=0.05)


@pytest.mark.acceptance(7, title="Goldstone pair below 1e-7 and +-lambda pairing to 1e-9 at 20 random omega")
def test_criterion_07_goldstone_and_pairing():
    rng = np.random.default_rng(20240607)
    for w in rng.uniform(1e-3, omega_validity_bound(MG), 20):
        sp = spectrum_at(MG, float(w), precision="extended")
        ev = sp.eigenvalues_xy
        scale = np.max(np.abs(ev))
        assert max(sp.goldstone) < 1e-7
        for lam in ev:
            assert np.min(np.abs(ev + lam)) < 1e-9 * scale


@pytest.mark.acceptance(8, title="orbits: drift < 1e-8 for both orbit figures, large orbit bounded, linear match < 100 eps^2")
def test_criterion_08_dynamics():
    w = 0.048
    period = max(slow_period(MG, w), 2 * math.pi / w)  # at least one electron cycle
    eq = equilibrium_state(MG, w)
    small = integrate(MG, small_loop_state(MG, w), w, period)
    large = integrate(MG, banana_state(MG, w), w, period)
    for tr in (small, large):
        assert tr.energy_drift < 1e-8
        assert tr.Lz_drift < 1e-8
    assert np.max(np.linalg.norm(large.electron - eq.r, axis=1)) < eq.r[0]

    fixed = MG.with_infinite_nucleus()
    eps = 1e-4
    lin = linearize(fixed, solve_equilibrium(fixed, w))
    y_eq = equilibrium_state(fixed, w).to_vector()
    for mode in normal_modes(lin):
        tr = integrate(fixed, normal_mode_state(fixed, w, mode, eps), w, 2 * math.pi / mode.frequency, tol=1e-13)
        e_pred, c_pred = mode.path(tr.t, eps)
        err = max(
            np.max(np.linalg.norm(tr.electron[:, :2] - y_eq[:2] - e_pred, axis=1)),
            np.max(np.linalg.norm(tr.core[:, :2] - y_eq[3:5] - c_pred, axis=1)),
        )
        assert err < 100 * eps**2


@pytest.mark.acceptance(9, title="splitting: mu5 = -0.001 +-5%, d5 = 9e-5 +-10%, radial integrals to 1e-8, H1 diagonal < 1e-10")
def test_criterion_09_quantum_splitting():
    pair = dipole_splitting(MG, 5)
    assert pair.d_n == pytest.approx(9e-5, rel=0.10)
    for n in range(2, 9):
        for s in (-2.0, 0.0, 1.0):
            assert radial_integral(n, n - 1, s) == pytest.approx(radial_integral_quadrature(n, n - 1, s), rel=1e-8)
    H = interaction_matrix(MG, 5)
    assert abs(H[0, 0]) < 1e-10 and abs(H[1, 1]) < 1e-10
    assert pair.mu_n == pytest.approx(-0.001, rel=0.05)


@pytest.mark.acceptance(10, title="decay: <5+|y|5-> = -8.35i, <3,2,2|(x-iy)|5-> = sqrt2 * 4.74 (+-1%), lab photon energies")
def test_criterion_10_decay():
    linear, circular = decay_observables(MG, 5)
    assert abs(linear.matrix_element.real) < 1e-12
    assert linear.matrix_element.imag == pytest.approx(-8.35, rel=0.01)
    assert abs(circular.matrix_element.imag) < 1e-12
    assert circular.matrix_element.real == pytest.approx(math.sqrt(2) * 4.74, rel=0.01)
    d5 = dipole_splitting(MG, 5).d_n
    assert linear.photon_energy_lab == pytest.approx(energy(5) - energy(4) - 2 * d5, rel=1e-14)
    assert circular.photon_energy_lab == pytest.approx(energy(4) - energy(3) - d5, rel=1e-14)


@pytest.mark.acceptance(11, title="densities: norm 1 +-1%, stationary in rotating frame, contrast falls from n=5 to n=6")
def test_criterion_11_densities():
    start = time.perf_counter()
    for n in (5, 6):
        assert density_normalization(n, "-", resolution=200) == pytest.approx(1.0, abs=0.01)
        a = localized_density(n, "-", frame="rotating", t=0.0)
        b = localized_density(n, "-", frame="rotating", t=1e3)
        assert np.array_equal(a.values, b.values)
    assert time.perf_counter() - start < 10.0
    c5, c6 = localization_contrast(5), localization_contrast(6)
    assert c6 < c5, f"contrast n=5: {c5:.4g}, n=6: {c6:.4g}"


CRITERIA = [
    test_criterion_01_calibration,
    test_criterion_02_equilibrium_regression,
    test_criterion_03_closed_form_equals_bisection,
    test_criterion_04_finite_nucleus,
    test_criterion_05_spectrum,
    test_criterion_06_threshold,
    test_criterion_07_goldstone_and_pairing,
    test_criterion_08_dynamics,
    test_criterion_09_quantum_splitting,
    test_criterion_10_decay,
    test_criterion_11_densities,
]


def main() -> int:
    failures = 0
    for fn in CRITERIA:
        mark = next(m for m in fn.pytestmark if m.name == "acceptance")
        try:
            fn()
            status = "PASS"
        except AssertionError as exc:
            status = "FAIL"
            failures += 1
            detail = str(exc).splitlines()[0] if str(exc) else ""
        print(f"criterion {mark.args[0]:2d}: {status}  {mark.kwargs['title']}" + (f"  [{detail}]" if status == "FAIL" and detail else ""))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
