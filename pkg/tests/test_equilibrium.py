import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deformed_atom.equilibrium import (
    angular_momentum,
    cubic_residual,
    cubic_rhs,
    equilibrium_momenta,
    equilibrium_scan,
    finite_mass_residuals,
    force_residuals,
    omega_from_delta,
    omega_validity_bound,
    solve_delta,
    solve_equilibrium,
    solve_equilibrium_finite_mass,
    x1_from_delta,
)
from deformed_atom.errors import DomainError
from deformed_atom.params import AtomModel


def bisect_cubic(Z, rhs, lo=0.0, hi=1.0, iters=200):
    """Plain bisection on d^3 + 2 d^2 + d/Z - rhs, independent of the closed form."""
    f = lambda d: d**3 + 2 * d**2 + d / Z - rhs
    while f(hi) < 0:
        hi *= 2
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_delta_small_omega(mg):
    w = 1e-3
    assert solve_delta(mg, w) == pytest.approx((mg.Z - 1) * w**2 / mg.k, rel=1e-3)


def test_delta_at_fig5_frequency_matches_bisection(mg):
    d = solve_delta(mg, 0.06)
    assert d == pytest.approx(bisect_cubic(12, cubic_rhs(mg, 0.06)), rel=1e-12)
    # 11*0.06^2/k is only the leading term: it overshoots here because 2*Z*delta ~ 0.2
    assert d < 11 * 0.06**2 / mg.k


def test_delta_at_threshold(mg):
    assert solve_delta(mg, 0.1026) == pytest.approx(0.022, rel=0.10)


def test_cubic_residual_tiny(mg):
    for w in np.linspace(0.005, 0.5, 50):
        assert abs(cubic_residual(mg, w, solve_delta(mg, w))) < 1e-12


@pytest.mark.parametrize("w", np.round(np.arange(0.01, 0.1001, 0.01), 2))
def test_omega_from_delta_round_trip(mg, w):
    assert omega_from_delta(mg, solve_delta(mg, w)) == pytest.approx(w, rel=1e-10)


def test_omega_from_delta_zero(mg):
    assert omega_from_delta(mg, 0.0) == 0.0


def test_omega_from_threshold_delta(mg):
    assert omega_from_delta(mg, 0.022) == pytest.approx(0.1026, rel=0.01)


def test_hard_bound_error(mg):
    w = math.sqrt(mg.k / (mg.Z - 1)) * 1.01
    with pytest.raises(DomainError, match="hard bound"):
        solve_delta(mg, w)
    with pytest.raises(DomainError, match="hard bound"):
        solve_equilibrium(mg, w)


def test_validity_bound_error_is_distinct(mg):
    w = omega_validity_bound(mg) * 1.001
    with pytest.raises(DomainError, match="validity") as info:
        solve_equilibrium(mg, w)
    assert "hard bound" not in str(info.value)


def test_kepler_limit(mg):
    w = 1e-4
    assert solve_equilibrium(mg, w).x1 == pytest.approx(w ** (-2 / 3), rel=1e-3)


def test_x2_at_quantum_resonance(mg):
    assert solve_equilibrium(mg, 9 / 800).x2 == pytest.approx(0.0079, rel=0.02)


def test_angular_momentum_at_fig7_frequency(mg):
    # the orbit figure caption calls this 3 hbar; the Kepler estimate gives 2.75
    Mz = solve_equilibrium(mg, 0.048).Mz
    assert 2.75 <= Mz
    assert Mz == pytest.approx(3.0, rel=0.01)


def test_geometry_invariants(mg):
    for w in np.linspace(0.001, 0.55, 40):
        c = solve_equilibrium(mg, w)
        assert c.x1 > 0 and 0 <= c.delta < 1
        assert c.x2 == pytest.approx(c.delta * c.x1, rel=1e-14)
        assert c.r0 @ c.R0 < 0 and c.r0[2] == c.R0[2] == 0
        assert c.x1 == pytest.approx(x1_from_delta(mg, c.delta), rel=1e-12)
        assert c.Mz == pytest.approx(w * (c.x1**2 + 11 * c.x2**2), rel=1e-14)


def test_degenerate_config(mg):
    c = solve_equilibrium(mg, 0.0)
    assert c.degenerate and c.delta == 0.0 and math.isinf(c.x1)


def test_force_balance_on_grid(mg):
    for w in np.linspace(0.0005, omega_validity_bound(mg), 300):
        r1, r2 = force_residuals(mg, solve_equilibrium(mg, w))
        assert abs(r1) < 1e-10 and abs(r2) < 1e-10


def test_delta_monotone(mg):
    ws = np.linspace(0.001, omega_validity_bound(mg) * 0.999, 400)
    d = [solve_delta(mg, w) for w in ws]
    assert np.all(np.diff(d) > 0)


def test_unique_positive_root(mg):
    for w in np.linspace(0.001, 0.55, 60):
        roots = np.roots([1, 2, 1 / 12, -cubic_rhs(mg, w)])
        pos = [r for r in roots if abs(r.imag) < 1e-12 and r.real > 0]
        assert len(pos) == 1
        assert pos[0].real == pytest.approx(solve_delta(mg, w), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(Z=st.integers(2, 80), k=st.floats(0.05, 50), frac=st.floats(1e-4, 0.999))
def test_closed_form_matches_bisection_any_model(Z, k, frac):
    m = AtomModel(Z=Z, k=k)
    w = frac * omega_validity_bound(m)
    rhs = cubic_rhs(m, w)
    assert solve_delta(m, w) == pytest.approx(bisect_cubic(Z, rhs), rel=1e-10)


def test_mz_decreasing_toward_kepler(mg):
    ws = np.linspace(0.0005, 0.1, 200)
    Mz = np.array([solve_equilibrium(mg, w).Mz for w in ws])
    assert np.all(np.diff(Mz) < 0)
    small = solve_equilibrium(mg, 1e-5)
    assert small.Mz / 1e-5 ** (-1 / 3) == pytest.approx(1.0, rel=1e-3)


def test_validity_bound_value(mg):
    assert omega_validity_bound(mg) == pytest.approx(math.sqrt(37 * mg.k / (11 * 38)), rel=1e-14)
    assert omega_validity_bound(mg) == pytest.approx(0.556, abs=5e-4)


def test_electron_meets_core_at_validity_bound(mg):
    c = solve_equilibrium(mg, omega_validity_bound(mg))
    assert c.x2 == pytest.approx(c.x1, rel=1e-9)
    r1, r2 = force_residuals(mg, c)
    assert abs(r1) < 1e-10 and abs(r2) < 1e-10


@pytest.mark.parametrize("Z", [2, 5, 12, 100, 10_000])
def test_validity_bound_stricter_than_hard_bound(Z):
    m = AtomModel(Z=Z, k=3.0)
    assert omega_validity_bound(m) < math.sqrt(m.k / (Z - 1))


def test_finite_mass_converges_to_closed_form():
    m = AtomModel(Z=12, k=121 / 34.62, m_c=11.0, m_n=1e12)
    for w in (0.01, 0.048, 0.09):
        a = solve_equilibrium_finite_mass(m, w)
        b = solve_equilibrium(m.with_infinite_nucleus(), w)
        assert a.x1 == pytest.approx(b.x1, rel=1e-8)
        assert a.x2 == pytest.approx(b.x2, rel=1e-8)


def test_finite_mass_magnesium_close(mg):
    a = solve_equilibrium_finite_mass(mg, 0.06)
    b = solve_equilibrium(mg, 0.06)
    assert abs(a.x1 - b.x1) / b.x1 < 1e-3
    assert a.x1 != b.x1


def test_finite_mass_two_electron_atom(helium_like):
    m = AtomModel(Z=2, k=1.0, m_c=1.0, m_n=7294.3)
    c = solve_equilibrium_finite_mass(m, 0.01)
    assert c.x1 > 0 and c.x2 > 0
    assert np.max(np.abs(finite_mass_residuals(m, 0.01, c.x1, c.x2))) < 1e-10


def test_finite_mass_any_core_mass():
    m = AtomModel(Z=5, k=2.0, m_c=9.0, m_n=5000.0)
    c = solve_equilibrium_finite_mass(m, 0.05)
    assert np.max(np.abs(finite_mass_residuals(m, 0.05, c.x1, c.x2))) < 1e-10
    with pytest.raises(DomainError):
        solve_equilibrium(m, 0.05)


def test_equilibrium_momenta_infinite_mass(mg_fixed):
    c = solve_equilibrium(mg_fixed, 0.05)
    py, Py = equilibrium_momenta(mg_fixed, 0.05, c.x1, c.x2)
    assert py == pytest.approx(0.05 * c.x1)
    assert Py == pytest.approx(-0.05 * 11 * c.x2)
    assert c.Mz == pytest.approx(angular_momentum(mg_fixed, 0.05, c.x1, c.x2))


def test_scan_order(mg):
    ws = [0.02, 0.01, 0.05]
    assert [c.omega for c in equilibrium_scan(mg, ws)] == ws
