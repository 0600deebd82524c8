"""
Static equilibria of the model in the frame co-rotating with the electron.

In equilibrium the electron, nucleus and core lie on one line perpendicular
to the rotation axis, the electron at ``x1 > 0`` and the core at ``-x2`` on
the opposite side. The deformation is measured by ``delta = x2 / x1``,
which solves a cubic whose coefficients depend only on Z, k and omega
(for a fixed nucleus and core mass (Z-1) m_e).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .params import AtomModel


@dataclass(frozen=True)
class EquilibriumConfig:
    """
    Co-rotating static configuration.

    ``x1`` is the electron-nucleus distance and ``x2`` the core-nucleus
    distance (electron on +x, core on -x). ``Mz`` is the total angular
    momentum along the rotation axis. At ``omega == 0`` the configuration
    is the degenerate Kepler limit with ``x1 = inf``.
    """

    omega: float
    delta: float
    x1: float
    x2: float
    Mz: float

    @property
    def degenerate(self) -> bool:
        return math.isinf(self.x1)

    @property
    def r0(self) -> np.ndarray:
        return np.array([self.x1, 0.0, 0.0])

    @property
    def R0(self) -> np.ndarray:
        return np.array([-self.x2, 0.0, 0.0])


def _require_closed_form(model: AtomModel):
    if not model.standard_core_mass:
        raise DomainError(
            "closed-form equilibrium assumes m_c = (Z-1) m_e; "
            "use solve_equilibrium_finite_mass for other core masses"
        )


def cubic_rhs(model: AtomModel, omega: float) -> float:
    """Right side c of delta^3 + 2 delta^2 + delta/Z = c."""
    Z, k = model.Z, model.k
    if omega == 0.0:
        return 0.0
    return (1.0 - 1.0 / Z) / (k / omega**2 - Z + 1)


def cubic_residual(model: AtomModel, omega: float, delta: float) -> float:
    """Signed residual of the deformation cubic, relative to its right side."""
    c = cubic_rhs(model, omega)
    lhs = delta**3 + 2.0 * delta**2 + delta / model.Z
    if c == 0.0:
        return lhs
    return (lhs - c) / c


def _check_hard_bound(model: AtomModel, omega: float):
    if omega < 0 or not math.isfinite(omega):
        raise DomainError(f"omega must be finite and non-negative, got {omega}")
    if (model.Z - 1) * omega**2 >= model.k:
        raise DomainError(
            f"omega={omega} violates the hard bound (Z-1) omega^2 < k: "
            "centrifugal force exceeds the spring tension"
        )


def _largest_real_cubic_root(p: float, q: float) -> float:
    """Largest real root of the depressed cubic y^3 + p y + q = 0."""
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc >= 0.0:
        s = math.sqrt(disc)
        return float(np.cbrt(-q / 2.0 + s) + np.cbrt(-q / 2.0 - s))
    # three real roots: the complex cube roots are conjugate, so go trigonometric
    m = 2.0 * math.sqrt(-p / 3.0)
    arg = 3.0 * q / (p * m)
    arg = min(1.0, max(-1.0, arg))
    return m * math.cos(math.acos(arg) / 3.0)


def solve_delta(model: AtomModel, omega: float) -> float:
    """
    Relative core displacement ``delta`` at rotation frequency ``omega``.

    Uses the closed-form Cardano root (trigonometric branch when the cubic
    has three real roots) followed by Newton polishing on the cubic. The
    cubic has all-positive coefficients on the left, so there is exactly
    one positive root and it is the largest real one.

    Raises
    ------
    DomainError
        If ``(Z-1) omega^2 >= k``.
    """
    _require_closed_form(model)
    _check_hard_bound(model, omega)
    if omega == 0.0:
        return 0.0
    Z = model.Z
    c = cubic_rhs(model, omega)
    # delta = y - 2/3 removes the quadratic term
    p = 1.0 / Z - 4.0 / 3.0
    q = 16.0 / 27.0 - 2.0 / (3.0 * Z) - c
    delta = _largest_real_cubic_root(p, q) - 2.0 / 3.0
    if delta <= 0.0:
        # cancellation against 2/3 at tiny omega; the linear estimate is a safe start
        delta = c * Z
    for _ in range(4):
        f = delta**3 + 2.0 * delta**2 + delta / Z - c
        df = 3.0 * delta**2 + 4.0 * delta + 1.0 / Z
        step = f / df
        delta -= step
        if abs(step) <= 1e-16 * delta:
            break
    return delta


def omega_from_delta(model: AtomModel, delta: float) -> float:
    """Rotation frequency at which the equilibrium deformation equals ``delta``."""
    _require_closed_form(model)
    if delta < 0:
        raise DomainError(f"delta must be non-negative, got {delta}")
    Z, k = model.Z, model.k
    poly = delta + 2 * Z * delta**2 + Z * delta**3
    return math.sqrt(k * poly / ((Z - 1) * (1.0 + poly)))


def omega_validity_bound(model: AtomModel) -> float:
    """Largest omega for which the core stays closer to the nucleus than the electron."""
    Z, k = model.Z, model.k
    return math.sqrt((3 * Z + 1) * k / ((Z - 1) * (3 * Z + 2)))


def x1_from_delta(model: AtomModel, delta: float) -> float:
    Z, k = model.Z, model.k
    poly = 1.0 + delta + 2 * Z * delta**2 + Z * delta**3
    return ((Z - 1) * poly / (delta * (1.0 + delta) ** 2 * k)) ** (1.0 / 3.0)


def angular_momentum(model: AtomModel, omega: float, x1: float, x2: float) -> float:
    """Total angular momentum of the rigidly rotating configuration (fixed nucleus)."""
    return omega * (model.m_e * x1**2 + model.m_c * x2**2)


def force_residuals(model: AtomModel, config: EquilibriumConfig) -> tuple[float, float]:
    """
    Relative residuals of the two fixed-nucleus force-balance equations

        Z/x1^2       = omega^2 x1 + [k - (Z-1) omega^2] x2
        (Z-1)/(x1+x2)^2 = [k - (Z-1) omega^2] x2
    """
    Z, k, w = model.Z, model.k, config.omega
    x1, x2 = config.x1, config.x2
    spring = k - (Z - 1) * w**2
    lhs1 = Z / x1**2
    lhs2 = (Z - 1) / (x1 + x2) ** 2
    r1 = (lhs1 - (w**2 * x1 + spring * x2)) / lhs1
    r2 = (lhs2 - spring * x2) / lhs2
    return r1, r2


def solve_equilibrium(model: AtomModel, omega: float) -> EquilibriumConfig:
    """
    Equilibrium configuration for an infinitely heavy nucleus.

    Parameters
    ----------
    model : AtomModel
        Must have the default core mass (Z-1) m_e.
    omega : float
        Rotation frequency, ``0 <= omega <= omega_validity_bound(model)``.

    Returns
    -------
    EquilibriumConfig
        ``omega == 0`` returns the Kepler limit with ``x1 = inf`` and
        ``Mz = inf``.

    Raises
    ------
    DomainError
        Separately for the hard bound (core flies off) and the
        model-validity bound (core farther out than the electron).
    """
    _require_closed_form(model)
    _check_hard_bound(model, omega)
    w_max = omega_validity_bound(model)
    if omega > w_max * (1.0 + 1e-12):
        raise DomainError(
            f"omega={omega} exceeds the model-validity bound {w_max:.6g}: "
            "the core would sit farther from the nucleus than the electron"
        )
    if omega == 0.0:
        return EquilibriumConfig(omega=0.0, delta=0.0, x1=math.inf, x2=0.0, Mz=math.inf)
    Z, k = model.Z, model.k
    delta = solve_delta(model, omega)
    x1 = (Z / (omega**2 + (k - (Z - 1) * omega**2) * delta)) ** (1.0 / 3.0)
    x2 = delta * x1
    return EquilibriumConfig(
        omega=omega,
        delta=delta,
        x1=x1,
        x2=x2,
        Mz=angular_momentum(model, omega, x1, x2),
    )


def _mass_coefficients(model: AtomModel):
    """(m_e m_n, m_c m_n, m_e m_c) / M, with the infinite-nucleus limits."""
    me, mc = model.m_e, model.m_c
    if model.infinite_nucleus:
        return me, mc, 0.0
    M = me + mc + model.m_n
    return me * model.m_n / M, mc * model.m_n / M, me * mc / M


def finite_mass_residuals(model: AtomModel, omega: float, x1: float, x2: float) -> np.ndarray:
    """Relative residuals of the two coupled equilibrium equations for finite masses."""
    ce, cc, cec = _mass_coefficients(model)
    Z, k, w2 = model.Z, model.k, omega**2
    lhs1 = Z / x1**2
    lhs2 = (Z - 1) / (x1 + x2) ** 2
    r1 = lhs1 - (k * x2 + w2 * (ce * x1 - cc * x2))
    r2 = lhs2 - (k * x2 - w2 * ((cec + cc) * x2 + cec * x1))
    return np.array([r1 / lhs1, r2 / lhs2])


def _finite_mass_jacobian(model: AtomModel, omega: float, x1: float, x2: float) -> np.ndarray:
    ce, cc, cec = _mass_coefficients(model)
    Z, k, w2 = model.Z, model.k, omega**2
    s = x1 + x2
    # rows are the unscaled residuals lhs - rhs
    return np.array(
        [
            [-2 * Z / x1**3 - w2 * ce, -k + w2 * cc],
            [-2 * (Z - 1) / s**3 + w2 * cec, -2 * (Z - 1) / s**3 - k + w2 * (cec + cc)],
        ]
    )


def solve_equilibrium_finite_mass(
    model: AtomModel, omega: float, tol: float = 1e-14, max_iter: int = 100
) -> EquilibriumConfig:
    """
    Equilibrium with a finite nucleus mass (and any core mass).

    Damped Newton iteration on (x1, x2), started from the fixed-nucleus
    closed form. The returned ``Mz`` is the total angular momentum of the
    relative motion about the rotation axis.

    Raises
    ------
    ConvergenceError
        With the final residual vector attached.
    """
    _check_hard_bound(model, omega)
    if omega == 0.0:
        return EquilibriumConfig(omega=0.0, delta=0.0, x1=math.inf, x2=0.0, Mz=math.inf)
    guess_model = AtomModel(Z=model.Z, k=model.k)
    if (guess_model.Z - 1) * omega**2 >= guess_model.k:
        raise DomainError(f"omega={omega} is outside the range with a stable starting guess")
    start = solve_equilibrium(guess_model, min(omega, omega_validity_bound(guess_model)))
    x = np.array([start.x1, start.x2])

    def unscaled(x):
        rel = finite_mass_residuals(model, omega, *x)
        return rel * np.array([model.Z / x[0] ** 2, (model.Z - 1) / (x[0] + x[1]) ** 2])

    res = finite_mass_residuals(model, omega, *x)
    for _ in range(max_iter):
        if np.max(np.abs(res)) < tol:
            break
        step = np.linalg.solve(_finite_mass_jacobian(model, omega, *x), -unscaled(x))
        lam = 1.0
        while True:
            trial = x + lam * step
            if np.all(trial > 0):
                trial_res = finite_mass_residuals(model, omega, *trial)
                if np.linalg.norm(trial_res) < np.linalg.norm(res):
                    break
            lam *= 0.5
            if lam < 1e-8:
                raise ConvergenceError(
                    f"damped Newton stalled at omega={omega}: residuals {res}", residual=res
                )
        x, res = trial, trial_res
    if np.max(np.abs(res)) > 1e3 * tol:
        raise ConvergenceError(
            f"finite-mass equilibrium did not converge at omega={omega}: residuals {res}",
            residual=res,
        )
    x1, x2 = float(x[0]), float(x[1])
    return EquilibriumConfig(
        omega=omega,
        delta=x2 / x1,
        x1=x1,
        x2=x2,
        Mz=_finite_mass_angular_momentum(model, omega, x1, x2),
    )


def equilibrium_momenta(model: AtomModel, omega: float, x1: float, x2: float) -> tuple[float, float]:
    """
    y-components of the canonical momenta (p, P) that keep r = (x1,0,0)
    and R = (-x2,0,0) at rest in the rotating frame.
    """
    a = np.array([[1.0 / model.mu_e, model.inv_m_n], [model.inv_m_n, 1.0 / model.mu_c]])
    py, Py = np.linalg.solve(a, [omega * x1, -omega * x2])
    return float(py), float(Py)


def _finite_mass_angular_momentum(model, omega, x1, x2):
    py, Py = equilibrium_momenta(model, omega, x1, x2)
    return x1 * py + (-x2) * Py


def equilibrium_scan(model: AtomModel, omegas) -> list[EquilibriumConfig]:
    return [solve_equilibrium(model, float(w)) for w in omegas]
