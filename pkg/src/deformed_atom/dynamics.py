"""
Nonlinear motion of the electron and the core in the rotating frame.

The phase point is the 12-vector ``(r, R, p, P)`` of electron-nucleus and
core-nucleus relative positions with their canonical momenta. The frame
rotates with angular velocity ``omega`` about +z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .equilibrium import (
    equilibrium_momenta,
    solve_equilibrium,
    solve_equilibrium_finite_mass,
)
from .errors import DomainError, IntegrationError
from .params import AtomModel

COLLISION_GUARD = 1e-3
DEFAULT_TOL = 1e-10
SAMPLES_PER_FAST_PERIOD = 20

_ZHAT = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class PhaseState:
    r: np.ndarray
    R: np.ndarray
    p: np.ndarray
    P: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        for name in ("r", "R", "p", "P"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            object.__setattr__(self, name, v)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.r, self.R, self.p, self.P])

    @classmethod
    def from_vector(cls, y, t: float = 0.0) -> PhaseState:
        y = np.asarray(y, dtype=float)
        return cls(r=y[0:3], R=y[3:6], p=y[6:9], P=y[9:12], t=float(t))


@dataclass
class Trajectory:
    """
    Sampled solution. ``t`` has shape ``(N,)`` and ``y`` shape ``(N, 12)``;
    drifts are the largest relative departures of energy and L_z from
    their initial values over all samples.
    """

    t: np.ndarray
    y: np.ndarray
    omega: float
    energy: np.ndarray = field(repr=False)
    Lz: np.ndarray = field(repr=False)
    energy_drift: float = 0.0
    Lz_drift: float = 0.0

    @property
    def samples(self) -> list[PhaseState]:
        return [PhaseState.from_vector(y, t) for t, y in zip(self.t, self.y)]

    @property
    def final(self) -> PhaseState:
        return PhaseState.from_vector(self.y[-1], self.t[-1])

    @property
    def electron(self) -> np.ndarray:
        return self.y[:, 0:3]

    @property
    def core(self) -> np.ndarray:
        return self.y[:, 3:6]

    def lab_frame(self) -> tuple[np.ndarray, np.ndarray]:
        """Electron and core positions rotated into the inertial frame."""
        return to_lab_frame(self.t, self.electron, self.omega), to_lab_frame(self.t, self.core, self.omega)


def to_lab_frame(t, positions, omega: float) -> np.ndarray:
    """Rotate rotating-frame positions by the angle ``omega * t`` about z."""
    t = np.asarray(t, dtype=float)
    positions = np.asarray(positions, dtype=float)
    c, s = np.cos(omega * t), np.sin(omega * t)
    out = positions.copy()
    out[..., 0] = c * positions[..., 0] - s * positions[..., 1]
    out[..., 1] = s * positions[..., 0] + c * positions[..., 1]
    return out


def _check(r, R):
    if np.linalg.norm(r) < COLLISION_GUARD:
        raise DomainError(f"electron within {COLLISION_GUARD} bohr of the nucleus")
    if np.linalg.norm(r - R) < COLLISION_GUARD:
        raise DomainError(f"electron within {COLLISION_GUARD} bohr of the core")


def hamiltonian_rotating(model: AtomModel, s: PhaseState, omega: float) -> float:
    """Energy of the relative motion in the frame rotating at ``omega`` about z."""
    _check(s.r, s.R)
    Z = model.Z
    w = omega * _ZHAT
    d = s.r - s.R
    kinetic = s.p @ s.p / (2 * model.mu_e) + s.P @ s.P / (2 * model.mu_c) + (s.p @ s.P) * model.inv_m_n
    potential = -Z / np.linalg.norm(s.r) + (Z - 1) / np.linalg.norm(d) + 0.5 * model.k * (s.R @ s.R)
    rotation = -w @ (np.cross(s.r, s.p) + np.cross(s.R, s.P))
    return float(kinetic + potential + rotation)


def angular_momentum_z(s: PhaseState) -> float:
    return float(np.cross(s.r, s.p)[2] + np.cross(s.R, s.P)[2])


def _rhs(y, model: AtomModel, omega: float) -> np.ndarray:
    r, R, p, P = y[0:3], y[3:6], y[6:9], y[9:12]
    Z = model.Z
    w = omega * _ZHAT
    inv_mn = model.inv_m_n
    d = r - R
    rn, dn = np.linalg.norm(r), np.linalg.norm(d)
    coulomb_core = (Z - 1) * d / dn**3
    out = np.empty(12)
    out[0:3] = p / model.mu_e + P * inv_mn - np.cross(w, r)
    out[3:6] = P / model.mu_c + p * inv_mn - np.cross(w, R)
    out[6:9] = -Z * r / rn**3 + coulomb_core - np.cross(w, p)
    out[9:12] = -model.k * R - coulomb_core - np.cross(w, P)
    return out


def equations_of_motion(model: AtomModel, s: PhaseState, omega: float) -> PhaseState:
    """Time derivatives (dr/dt, dR/dt, dp/dt, dP/dt) packed as a PhaseState."""
    _check(s.r, s.R)
    return PhaseState.from_vector(_rhs(s.to_vector(), model, omega), s.t)


def _tidal(v):
    n = np.linalg.norm(v)
    u = v / n
    return (np.eye(3) - 3.0 * np.outer(u, u)) / n**3


def jacobian(model: AtomModel, s: PhaseState, omega: float) -> np.ndarray:
    """Analytic 12x12 Jacobian of the equations of motion at ``s``."""
    _check(s.r, s.R)
    Z = model.Z
    wx = omega * np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])  # omega x .
    I = np.eye(3)
    Tr = _tidal(s.r)
    Td = _tidal(s.r - s.R)
    J = np.zeros((12, 12))
    J[0:3, 0:3] = -wx
    J[0:3, 6:9] = I / model.mu_e
    J[0:3, 9:12] = I * model.inv_m_n
    J[3:6, 3:6] = -wx
    J[3:6, 9:12] = I / model.mu_c
    J[3:6, 6:9] = I * model.inv_m_n
    J[6:9, 0:3] = -Z * Tr + (Z - 1) * Td
    J[6:9, 3:6] = -(Z - 1) * Td
    J[6:9, 6:9] = -wx
    J[9:12, 0:3] = -(Z - 1) * Td
    J[9:12, 3:6] = -model.k * I + (Z - 1) * Td
    J[9:12, 9:12] = -wx
    return J


def equilibrium_state(model: AtomModel, omega: float) -> PhaseState:
    """Fixed point of the flow: positions on the x axis, momenta co-rotating."""
    if model.infinite_nucleus and model.standard_core_mass:
        cfg = solve_equilibrium(model, omega)
    else:
        cfg = solve_equilibrium_finite_mass(model, omega)
    py, Py = equilibrium_momenta(model, omega, cfg.x1, cfg.x2)
    return PhaseState(r=[cfg.x1, 0, 0], R=[-cfg.x2, 0, 0], p=[0, py, 0], P=[0, Py, 0])


def momenta_from_velocities(model: AtomModel, omega: float, r, R, v_e, v_c):
    """
    Canonical momenta giving rotating-frame velocities ``v_e`` (electron)
    and ``v_c`` (core) at positions ``r`` and ``R``.
    """
    w = omega * _ZHAT
    a = np.array([[1.0 / model.mu_e, model.inv_m_n], [model.inv_m_n, 1.0 / model.mu_c]])
    rhs = np.stack([np.asarray(v_e, float) + np.cross(w, r), np.asarray(v_c, float) + np.cross(w, R)])
    sol = np.linalg.solve(a, rhs)
    return sol[0], sol[1]


def _vec3(v) -> np.ndarray:
    v = np.zeros(3) if v is None else np.asarray(v, dtype=float)
    if v.shape == (2,):
        v = np.append(v, 0.0)
    return v.reshape(3)


def displaced_state(
    model: AtomModel,
    omega: float,
    electron_displacement=None,
    core_displacement=None,
    electron_velocity=None,
    electron_momentum=None,
    core_momentum=None,
    angular_momentum: float | None = None,
) -> PhaseState:
    """
    Equilibrium state with added deviations.

    Displacements and momentum deviations default to zero. When
    ``electron_velocity`` (rotating frame) is given, the electron momentum
    is chosen to produce it with the core momentum held at its equilibrium
    value plus ``core_momentum``.

    ``angular_momentum`` instead fixes the total L_z: the electron gets a
    purely azimuthal momentum sized so the state carries exactly that value.
    It cannot be combined with the electron velocity or momentum options.
    """
    eq = equilibrium_state(model, omega)
    r = eq.r + _vec3(electron_displacement)
    R = eq.R + _vec3(core_displacement)
    P = eq.P + _vec3(core_momentum)
    if angular_momentum is not None:
        if electron_velocity is not None or electron_momentum is not None:
            raise ValueError("angular_momentum fixes the electron momentum; drop the other electron options")
        rho = math.hypot(r[0], r[1])
        if rho == 0.0:
            raise DomainError("electron on the rotation axis cannot carry azimuthal momentum")
        core_L = float(np.cross(R, P)[2])
        phi_hat = np.array([-r[1], r[0], 0.0]) / rho
        p = (angular_momentum - core_L) / rho * phi_hat
        return PhaseState(r=r, R=R, p=p, P=P)
    if electron_velocity is not None:
        if electron_momentum is not None:
            raise ValueError("give either electron_velocity or electron_momentum, not both")
        v = _vec3(electron_velocity)
        p = model.mu_e * (v + np.cross(omega * _ZHAT, r) - P * model.inv_m_n)
    else:
        p = eq.p + _vec3(electron_momentum)
    return PhaseState(r=r, R=R, p=p, P=P)


def banana_state(model: AtomModel, omega: float, total_angular_momentum: float = 3.0) -> PhaseState:
    """
    Large-excursion initial condition: electron pushed 5 bohr along the
    direction of rotation, core pushed 0.1 bohr outward, total L_z fixed.
    """
    return displaced_state(
        model,
        omega,
        electron_displacement=(0.0, 5.0),
        core_displacement=(0.1, 0.0),
        angular_momentum=total_angular_momentum,
    )


def small_loop_state(model: AtomModel, omega: float, displacement: float = 0.2) -> PhaseState:
    """Electron pushed outward along x by ``displacement``; core and all momenta at equilibrium."""
    return displaced_state(model, omega, electron_displacement=(displacement, 0.0))


def normal_mode_state(model: AtomModel, omega: float, mode, amplitude: float) -> PhaseState:
    """
    Equilibrium plus ``amplitude`` times the real part of an in-plane mode
    vector, i.e. the t=0 point of the linear solution ``mode.path``.
    """
    from .stability import XY_INDEX

    y = equilibrium_state(model, omega).to_vector()
    y[XY_INDEX] += amplitude * np.real(mode.vector)
    return PhaseState.from_vector(y)


def fast_frequency(model: AtomModel, omega: float) -> float:
    """Upper estimate of the fastest oscillation frequency seen in the rotating frame."""
    return math.sqrt(model.k / model.mu_c) + 2.0 * abs(omega)


def integrate(
    model: AtomModel,
    s0: PhaseState,
    omega: float,
    t_end: float,
    tol: float = DEFAULT_TOL,
    n_samples: int | None = None,
) -> Trajectory:
    """
    Integrate the full equations of motion from ``s0.t`` to ``t_end``.

    Uses the adaptive DOP853 scheme with relative tolerance ``tol``.
    Samples are spaced to give at least 20 points per period of the
    fastest core oscillation.

    Raises
    ------
    IntegrationError
        If the electron comes within ``COLLISION_GUARD`` of the nucleus or
        core, or the step size collapses. The last good state is attached.
    """
    y0 = s0.to_vector()
    _check(s0.r, s0.R)
    t0 = float(s0.t)
    if not t_end > t0:
        raise ValueError(f"t_end={t_end} must exceed the initial time {t0}")
    if n_samples is None:
        dt = 2 * math.pi / fast_frequency(model, omega) / SAMPLES_PER_FAST_PERIOD
        n_samples = int(math.ceil((t_end - t0) / dt)) + 1
    n_samples = max(n_samples, 2)
    t_eval = np.linspace(t0, t_end, n_samples)

    def near_nucleus(t, y):
        return np.linalg.norm(y[0:3]) - COLLISION_GUARD

    def near_core(t, y):
        return np.linalg.norm(y[0:3] - y[3:6]) - COLLISION_GUARD

    near_nucleus.terminal = near_core.terminal = True
    scale = max(1.0, float(np.max(np.abs(y0))))
    sol = solve_ivp(
        lambda t, y: _rhs(y, model, omega),
        (t0, t_end),
        y0,
        method="DOP853",
        t_eval=t_eval,
        rtol=tol,
        atol=tol * 1e-2 * scale,
        events=(near_nucleus, near_core),
    )
    if sol.status == 1:
        which = 0 if sol.t_events[0].size else 1
        last = PhaseState.from_vector(sol.y_events[which][0], sol.t_events[which][0])
        body = ("nucleus", "core")[which]
        raise IntegrationError(
            f"integration stopped at t={last.t}: electron within {COLLISION_GUARD} bohr of the {body}",
            last_state=last,
        )
    if sol.status != 0:
        last = PhaseState.from_vector(sol.y[:, -1], sol.t[-1]) if sol.t.size else s0
        raise IntegrationError(f"integration stopped at t={last.t}: {sol.message}", last_state=last)
    t = sol.t
    y = sol.y.T
    energy = np.array([hamiltonian_rotating(model, PhaseState.from_vector(v), omega) for v in y])
    Lz = y[:, 0] * y[:, 7] - y[:, 1] * y[:, 6] + y[:, 3] * y[:, 10] - y[:, 4] * y[:, 9]
    return Trajectory(
        t=t,
        y=y,
        omega=omega,
        energy=energy,
        Lz=Lz,
        energy_drift=float(np.max(np.abs(energy - energy[0])) / abs(energy[0])),
        Lz_drift=float(np.max(np.abs(Lz - Lz[0])) / abs(Lz[0])),
    )


def time_reversed(s: PhaseState) -> PhaseState:
    """
    Momentum-flipped state. Flipping momenta and the sign of omega retraces
    a rotating-frame trajectory backwards.
    """
    return PhaseState(r=s.r, R=s.R, p=-s.p, P=-s.P, t=s.t)
