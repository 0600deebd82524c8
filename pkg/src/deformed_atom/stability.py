"""
Linear stability of the co-rotating equilibrium.

Small deviations from equilibrium split into an in-plane block acting on
``(a1x, a1y, b1x, b1y, a2x, a2y, b2x, b2y)`` (electron position and
momentum deviations, then the core's) and an axial block acting on
``(z1, s1, z2, s2)``. Both blocks are assembled in physical atomic units
from the linearized fixed-nucleus equations of motion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .equilibrium import (
    EquilibriumConfig,
    omega_validity_bound,
    solve_equilibrium,
)
from .errors import ConvergenceError, DegenerateModeError, DomainError
from .params import AtomModel

# positions of the in-plane and axial deviations inside the 12-vector (r, R, p, P)
XY_INDEX = np.array([0, 1, 6, 7, 3, 4, 9, 10])
Z_INDEX = np.array([2, 8, 5, 11])

ZERO_TOL = 1e-8
REAL_TOL = 1e-8


@dataclass(frozen=True)
class Linearization:
    M_xy: np.ndarray
    M_z: np.ndarray
    a1: float
    a2: float
    a3: float
    omega: float
    k: float
    A_rep: float
    A_att: float
    model: AtomModel = field(repr=False, default=None)
    config: EquilibriumConfig = field(repr=False, default=None)

    @property
    def full_matrix(self) -> np.ndarray:
        """The 12x12 linear map in the (r, R, p, P) ordering used by the integrator."""
        J = np.zeros((12, 12))
        J[np.ix_(XY_INDEX, XY_INDEX)] = self.M_xy
        J[np.ix_(Z_INDEX, Z_INDEX)] = self.M_z
        return J


@dataclass(frozen=True)
class StabilitySpectrum:
    """
    Normal-mode frequencies at one equilibrium.

    ``omega_xy`` holds ``(0, w1, w2, w3)`` with the Goldstone zero first;
    ``omega_z`` holds ``(w4, w5)``. A mode whose eigenvalues left the
    imaginary axis contributes ``|Im lambda|``, which may be zero.
    """

    omega_xy: tuple
    omega_z: tuple
    stable: bool
    eigenvalues_xy: np.ndarray = field(repr=False)
    eigenvalues_z: np.ndarray = field(repr=False)
    max_real_part: float = 0.0
    goldstone: tuple = (0.0, 0.0)

    @property
    def frequencies(self) -> tuple:
        """(w1, w2, w3, w4, w5)."""
        return tuple(self.omega_xy[1:]) + tuple(self.omega_z)


@dataclass(frozen=True)
class Ellipse:
    """Planar harmonic path x = ax cos(t + px), y = ay cos(t + px + phase)."""

    ax: float
    ay: float
    phase: float


@dataclass(frozen=True)
class NormalMode:
    frequency: float
    vector: np.ndarray = field(repr=False)
    electron: Ellipse
    core: Ellipse
    x_same_direction: bool
    y_same_direction: bool

    def path(self, t, amplitude: float = 1.0):
        """Electron and core deviations (each shape ``(len(t), 2)``) along the mode."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        z = amplitude * np.real(np.outer(np.exp(1j * self.frequency * t), self.vector))
        return z[:, 0:2], z[:, 4:6]

    def to_dict(self) -> dict:
        return {
            "frequency": self.frequency,
            "electron": {"ax": self.electron.ax, "ay": self.electron.ay, "phase": self.electron.phase},
            "core": {"ax": self.core.ax, "ay": self.core.ay, "phase": self.core.phase},
            "x_same_direction": self.x_same_direction,
            "y_same_direction": self.y_same_direction,
        }


def coupling_coefficients(Z: int, delta: float) -> tuple[float, float, float]:
    """Dimensionless couplings (a1, a2, a3) as functions of the deformation."""
    poly = 1.0 + delta + 2 * Z * delta**2 + Z * delta**3
    a1 = delta * (1 + 3 * Z * delta + 3 * Z * delta**2 + Z * delta**3) / ((Z - 1) * (1 + delta) * poly)
    a2 = delta / ((1 + delta) * poly)
    return a1, a2, 1.0 / (Z - 1)


def linearize(model: AtomModel, config: EquilibriumConfig) -> Linearization:
    """
    Linearized fixed-nucleus motion about ``config``.

    ``A_att = Z/x1^3`` and ``A_rep = (Z-1)/(x1+x2)^3`` are the tidal
    couplings of the electron to the nucleus and to the core. For the
    default core mass they equal ``k*(a1 + a2)`` and ``k*a2``.
    """
    if not config.delta > 0 or config.degenerate:
        raise DomainError("linearization needs a deformed equilibrium (delta > 0)")
    Z, k, w = model.Z, model.k, config.omega
    M, Mz, A_rep, A_att = _assemble(Z, k, model.m_e, model.m_c, w, config.x1, config.x2)
    M = np.array(M, dtype=float)
    Mz = np.array(Mz, dtype=float)
    a1, a2, a3 = coupling_coefficients(Z, config.delta)
    return Linearization(
        M_xy=M,
        M_z=Mz,
        a1=a1,
        a2=a2,
        a3=a3,
        omega=w,
        k=k,
        A_rep=float(A_rep),
        A_att=float(A_att),
        model=model,
        config=config,
    )


def _assemble(Z, k, me, mc, w, x1, x2):
    """Both blocks as nested lists; works for floats and mpmath numbers alike."""
    A_rep = (Z - 1) / (x1 + x2) ** 3
    A_att = Z / x1**3
    M = [[0 * w for _ in range(8)] for _ in range(8)]
    for i in (0, 2, 4, 6):
        # -omega x v for omega along z
        M[i][i + 1] = w
        M[i + 1][i] = -w
    M[0][2] = M[1][3] = 1 / me
    M[4][6] = M[5][7] = 1 / mc
    # tidal terms A (v - 3 m (m.v)) with m along x: -2A on x, +A on y
    M[2][0] = -2 * A_rep + 2 * A_att
    M[3][1] = A_rep - A_att
    M[2][4] = 2 * A_rep
    M[3][5] = -A_rep
    M[6][0] = 2 * A_rep
    M[7][1] = -A_rep
    M[6][4] = -2 * A_rep - k
    M[7][5] = A_rep - k
    Mz = [
        [0 * w, 1 / me, 0 * w, 0 * w],
        [A_rep - A_att, 0 * w, -A_rep, 0 * w],
        [0 * w, 0 * w, 0 * w, 1 / mc],
        [-A_rep, 0 * w, A_rep - k, 0 * w],
    ]
    return M, Mz, A_rep, A_att


def _extended_eigenvalues(lin: Linearization, dps: int = 40):
    """
    Eigenvalues with the equilibrium re-solved and both blocks rebuilt in
    ``dps``-digit arithmetic. Rounding of the force balance in double
    precision splits the Goldstone Jordan block by ~sqrt(eps); here the
    split drops to ~10^(-dps/2).
    """
    model, config = lin.model, lin.config
    if model is None or config is None:
        raise ValueError("extended precision needs a Linearization built by linearize()")
    with mp.workdps(dps):
        Z = model.Z
        k, me, mc, w = (mp.mpf(v) for v in (model.k, model.m_e, model.m_c, config.omega))

        def balance(a, b):
            s = a + b
            return [Z / a**2 - (Z - 1) / s**2 - me * w**2 * a, (k - mc * w**2) * b - (Z - 1) / s**2]

        x1, x2 = mp.findroot(balance, (mp.mpf(config.x1), mp.mpf(config.x2)))
        M, Mz, _, _ = _assemble(Z, k, me, mc, w, x1, x2)
        ev_xy = mp.eig(mp.matrix(M), left=False, right=False)
        ev_z = mp.eig(mp.matrix(Mz), left=False, right=False)
        return (
            np.array([complex(e) for e in ev_xy]),
            np.array([complex(e) for e in ev_z]),
        )


def _eigvals(matrix: np.ndarray) -> np.ndarray:
    try:
        ev = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"eigensolver failed for matrix\n{matrix}") from exc
    if not np.all(np.isfinite(ev)):
        raise np.linalg.LinAlgError(f"non-finite eigenvalues for matrix\n{matrix}")
    return ev


def _pair_frequencies(ev: np.ndarray) -> list[float]:
    # lambda, -lambda and their conjugates share |Im|; consecutive entries pair up
    im = np.sort(np.abs(ev.imag))
    return [float(x) for x in im[::2]]


def spectrum(lin: Linearization, precision: str = "double") -> StabilitySpectrum:
    """
    Eigenvalues of both blocks and the mode frequencies derived from them.

    The two smallest in-plane eigenvalues are the Goldstone pair from the
    broken rotational symmetry. ``stable`` is true when every other
    eigenvalue has a real part below ``REAL_TOL`` times the largest
    eigenvalue magnitude.

    ``precision="extended"`` recomputes the eigenvalues in 40-digit
    arithmetic (about 30 ms instead of 50 us); use it when the size of the
    Goldstone pair itself matters.
    """
    if precision == "double":
        ev_xy = _eigvals(lin.M_xy)
        ev_z = _eigvals(lin.M_z)
    elif precision == "extended":
        ev_xy, ev_z = _extended_eigenvalues(lin)
    else:
        raise ValueError(f"precision must be 'double' or 'extended', got {precision!r}")
    scale = max(np.max(np.abs(ev_xy)), np.max(np.abs(ev_z)))
    order = np.argsort(np.abs(ev_xy))
    goldstone = ev_xy[order[:2]]
    rest = ev_xy[order[2:]]
    max_re = max(np.max(np.abs(rest.real)), np.max(np.abs(ev_z.real)))
    stable = bool(max_re <= REAL_TOL * scale)
    omega_xy = tuple([0.0] + sorted(_pair_frequencies(rest)))
    omega_z = tuple(sorted(_pair_frequencies(ev_z)))
    return StabilitySpectrum(
        omega_xy=omega_xy,
        omega_z=omega_z,
        stable=stable,
        eigenvalues_xy=ev_xy,
        eigenvalues_z=ev_z,
        max_real_part=float(max_re),
        goldstone=tuple(float(abs(g)) / scale for g in goldstone),
    )


def spectrum_at(model: AtomModel, omega: float, precision: str = "double") -> StabilitySpectrum:
    return spectrum(linearize(model, solve_equilibrium(model, omega)), precision=precision)


def stability_threshold(model: AtomModel, xtol: float = 1e-7, n_scan: int = 400) -> float:
    """
    Smallest rotation frequency at which the slow in-plane mode goes unstable.

    Scans ``(0, omega_validity_bound]`` for the first unstable point, then
    bisects on the stability flag down to ``xtol``.

    Raises
    ------
    ConvergenceError
        If the equilibrium is stable over the whole valid range.
    """
    w_max = omega_validity_bound(model)
    grid = np.linspace(w_max / n_scan, w_max, n_scan)
    lo = None
    for w in grid:
        if spectrum_at(model, float(w)).stable:
            lo = float(w)
            continue
        if lo is None:
            raise ConvergenceError(f"equilibrium already unstable at omega={w}")
        hi = float(w)
        break
    else:
        raise ConvergenceError(f"no loss of stability found in (0, {w_max:.6g}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if spectrum_at(model, mid).stable:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _ellipse(vx: complex, vy: complex) -> Ellipse:
    phase = 0.0 if abs(vx) == 0 or abs(vy) == 0 else float(np.angle(vy / vx))
    return Ellipse(ax=float(abs(vx)), ay=float(abs(vy)), phase=phase)


def normal_modes(lin: Linearization, rel_gap: float = 1e-8) -> list[NormalMode]:
    """
    Elliptical electron and core paths of the three nonzero in-plane modes.

    Each eigenvector has unit Euclidean norm over the 8 in-plane deviation
    components and a global phase making the electron's x amplitude real and
    positive. Modes are returned in order of increasing frequency.

    Raises
    ------
    DomainError
        If the equilibrium is not linearly stable.
    DegenerateModeError
        If two mode frequencies coincide within ``rel_gap``.
    """
    spec = spectrum(lin)
    if not spec.stable:
        raise DomainError("normal modes need a linearly stable equilibrium")
    ev, vecs = np.linalg.eig(lin.M_xy)
    scale = np.max(np.abs(ev))
    picked = [i for i in range(8) if ev[i].imag > ZERO_TOL * scale * 10]
    picked.sort(key=lambda i: ev[i].imag)
    if len(picked) != 3:
        raise DomainError(f"expected 3 oscillating in-plane modes, found {len(picked)}")
    freqs = [ev[i].imag for i in picked]
    for f0, f1 in zip(freqs, freqs[1:]):
        if f1 - f0 <= rel_gap * f1:
            raise DegenerateModeError(f"in-plane frequencies {f0} and {f1} are degenerate")
    modes = []
    for i in picked:
        v = vecs[:, i] / np.linalg.norm(vecs[:, i])
        ref = v[0] if abs(v[0]) > 1e-14 else v[np.argmax(np.abs(v))]
        v = v * np.exp(-1j * np.angle(ref))
        e, c = v[0:2], v[4:6]
        modes.append(
            NormalMode(
                frequency=float(ev[i].imag),
                vector=v,
                electron=_ellipse(e[0], e[1]),
                core=_ellipse(c[0], c[1]),
                x_same_direction=bool(np.real(e[0] * np.conj(c[0])) > 0),
                y_same_direction=bool(np.real(e[1] * np.conj(c[1])) > 0),
            )
        )
    return modes


def stability_scan(model: AtomModel, omegas) -> list[tuple[float, StabilitySpectrum]]:
    return [(float(w), spectrum_at(model, float(w))) for w in omegas]


def slow_period(model: AtomModel, omega: float) -> float:
    """Period 2 pi / w1 of the slow in-plane mode."""
    w1 = spectrum_at(model, omega).omega_xy[1]
    if w1 <= 0:
        raise DomainError(f"slow mode is not oscillatory at omega={omega}")
    return 2.0 * math.pi / w1
