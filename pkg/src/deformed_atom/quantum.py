"""
Quantum description near a level crossing of two circular Rydberg states.

The electron is restricted to the circular states |n, n-1, n-1> and
|n-1, n-2, n-2>. In the frame rotating at the resonance frequency
E_n - E_{n-1} their quasienergies coincide and the dipole coupling to the
displaced core splits them into the localized superpositions |n+> and |n->.

Sign convention: wavefunctions carry the Condon-Shortley factor
(-1)^m, so psi_{n,n-1,n-1} = (-1)^(n-1) |...| e^{i(n-1)phi}. This choice
fixes the sign of every off-diagonal element below; see ``mu`` in
``dipole_splitting``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from .equilibrium import solve_equilibrium
from .errors import ConsistencyError, DomainError
from .params import AtomModel

MAX_QUADRATURE_N = 40
CONSISTENCY_RTOL = 1e-6


def _check_n(n, minimum=1):
    if int(n) != n or n < minimum:
        raise DomainError(f"principal quantum number must be an integer >= {minimum}, got {n}")
    return int(n)


def energy(n: int) -> float:
    """Hydrogenic level -1/(2 n^2)."""
    n = _check_n(n)
    return -0.5 / n**2


def resonance_omega(n: int) -> float:
    """Rotation frequency at which |n,n-1,n-1> and |n-1,n-2,n-2> cross."""
    n = _check_n(n, 2)
    return energy(n) - energy(n - 1)


def _radial_norm(n: int) -> float:
    # R(r) = N r^(n-1) e^(-r/n), normalized with weight r^2
    return math.exp(1.5 * math.log(2.0 / n) + (n - 1) * math.log(2.0 / n) - 0.5 * gammaln(2 * n + 1))


def _polar_norm(l: int) -> float:
    # |Y_ll| = c_l sin^l(theta)
    return math.exp(0.5 * (gammaln(2 * l + 2) - math.log(4 * math.pi)) - l * math.log(2.0) - gammaln(l + 1))


def _cs_sign(m: int) -> int:
    return -1 if m % 2 else 1


@dataclass(frozen=True)
class CircularState:
    """The state |n, n-1, n-1> of hydrogen."""

    n: int

    def __post_init__(self):
        object.__setattr__(self, "n", _check_n(self.n))

    @property
    def l(self) -> int:
        return self.n - 1

    @property
    def m(self) -> int:
        return self.n - 1

    @property
    def energy(self) -> float:
        return energy(self.n)

    @property
    def peak_radius(self) -> float:
        """Maximum of r^2 |psi|^2 along the radius."""
        return float(self.n**2)

    def __call__(self, r, theta):
        return circular_wavefunction(self.n, r, theta)


def circular_wavefunction(n: int, r, theta):
    """
    Real (r, theta) part of psi_{n,n-1,n-1}; the full state multiplies this
    by exp(i (n-1) phi). Includes the Condon-Shortley sign.
    """
    n = _check_n(n)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    l = n - 1
    amp = _cs_sign(l) * _polar_norm(l) * _radial_norm(n)
    return amp * r**l * np.exp(-r / n) * np.sin(theta) ** l


def _cylindrical_form(n: int, rho_cyl, r):
    """psi_{n,n-1,n-1} written with r sin(theta) = cylindrical radius."""
    l = n - 1
    amp = _cs_sign(l) * _polar_norm(l) * _radial_norm(n)
    return amp * rho_cyl**l * np.exp(-r / n)


# ---------------------------------------------------------------------------
# matrix elements


def radial_integral(n1: int, n2: int, s: float = 0.0) -> float:
    """
    Closed form of int_0^inf R_{n1} R_{n2} r^(2+s) dr for circular radial
    functions (without the angular sign).
    """
    n1, n2 = _check_n(n1), _check_n(n2)
    p = n1 + n2 + s
    if p <= -1:
        raise DomainError(f"radial integral diverges for n1={n1}, n2={n2}, s={s}")
    beta = 1.0 / n1 + 1.0 / n2
    return _radial_norm(n1) * _radial_norm(n2) * math.exp(gammaln(p + 1) - (p + 1) * math.log(beta))


def radial_integral_quadrature(n1: int, n2: int, s: float = 0.0) -> float:
    """Adaptive-quadrature oracle for :func:`radial_integral`."""
    N1, N2 = _radial_norm(n1), _radial_norm(n2)
    beta = 1.0 / n1 + 1.0 / n2
    p = n1 + n2 + s
    # integrate in units of the peak position to keep quad well scaled
    peak = max(p / beta, 1.0)

    def f(u):
        r = u * peak
        return math.exp((p) * math.log(r) - beta * r) if r > 0 else 0.0

    val, _ = integrate.quad(f, 0, np.inf, epsabs=0, epsrel=1e-13, limit=400, points=None)
    return N1 * N2 * val * peak


def _sin_power_integral(m: int) -> float:
    """int_0^pi sin^m(theta) d theta."""
    return math.sqrt(math.pi) * math.exp(gammaln((m + 1) / 2) - gammaln(m / 2 + 1))


_OPERATORS = ("x", "y", "z", "x-iy", "x+iy")


def matrix_element(n_bra: int, n_ket: int, operator: str = "x", power: float = 0.0) -> complex:
    """
    <n_bra| r^power * op |n_ket> between circular states, op one of
    ``x``, ``y``, ``z``, ``x-iy``, ``x+iy``.

    Only states whose m differ by one couple; the result is exactly zero
    otherwise, and for ``z`` always.
    """
    if operator not in _OPERATORS:
        raise ValueError(f"operator must be one of {_OPERATORS}, got {operator!r}")
    a, b = _check_n(n_bra), _check_n(n_ket)
    if operator in ("x-iy", "x+iy"):
        sgn = -1j if operator == "x-iy" else 1j
        return matrix_element(a, b, "x", power) + sgn * matrix_element(a, b, "y", power)
    if operator == "z" or abs(a - b) != 1:
        return 0.0j
    if a < b:
        # hermitian conjugate of the (b, a) element
        return complex(np.conj(matrix_element(b, a, operator, power)))
    la, lb = a - 1, b - 1
    X = (
        _cs_sign(la)
        * _cs_sign(lb)
        * math.pi
        * _polar_norm(la)
        * _polar_norm(lb)
        * _sin_power_integral(la + lb + 2)
        * radial_integral(a, b, power + 1.0)
    )
    # upper state bra: phi integral of e^{-i phi} cos(phi) is pi, of e^{-i phi} sin(phi) is -i pi
    return complex(X) if operator == "x" else -1j * X


def matrix_element_quadrature(n_bra: int, n_ket: int, operator: str = "x", power: float = 0.0) -> complex:
    """Independent oracle: separate adaptive quadratures in r, theta and phi."""
    a, b = _check_n(n_bra), _check_n(n_ket)
    if a > MAX_QUADRATURE_N or b > MAX_QUADRATURE_N:
        raise DomainError("quadrature oracle limited to n <= 40")
    la, lb = a - 1, b - 1
    rad = radial_integral_quadrature(a, b, power + 1.0)
    pol, _ = integrate.quad(lambda t: np.sin(t) ** (la + lb + 1) * np.sin(t), 0, np.pi, epsabs=0, epsrel=1e-13)
    if operator == "z":
        return 0.0j
    if operator in ("x-iy", "x+iy"):
        sgn = -1j if operator == "x-iy" else 1j
        return matrix_element_quadrature(a, b, "x", power) + sgn * matrix_element_quadrature(a, b, "y", power)
    trig = np.cos if operator == "x" else np.sin
    dm = lb - la
    # the uniform rule is exact for these low-order trigonometric integrands
    phi = np.arange(64) * (2 * np.pi / 64)
    ang = complex(np.sum(np.exp(1j * dm * phi) * trig(phi)) * (2 * np.pi / 64))
    return _cs_sign(la) * _cs_sign(lb) * _polar_norm(la) * _polar_norm(lb) * pol * rad * ang


def dipole_vector(n_bra: int, n_ket: int, power: float = 0.0) -> np.ndarray:
    """Complex vector (<x>, <y>, <z>) between two circular states."""
    return np.array([matrix_element(n_bra, n_ket, op, power) for op in ("x", "y", "z")])


# ---------------------------------------------------------------------------
# level splitting


@dataclass(frozen=True)
class QuantumPair:
    """
    The coupled pair |n,n-1,n-1>, |n-1,n-2,n-2> at the resonance frequency.

    ``mu_n`` is the bare element <n| x/r^3 |n-1> and ``d_n`` the coupling
    -x2 (Z-1) mu_n. ``quasienergies`` is ``(minus, plus)``.
    """

    n: int
    omega_res: float
    x2: float
    mu_n: float
    d_n: float
    quasienergies: tuple

    @property
    def eigenvectors(self) -> dict:
        """Components of |n-> and |n+> on (|n>, |n-1>)."""
        s = 1.0 / math.sqrt(2.0)
        return {"minus": np.array([s, -s]), "plus": np.array([s, s])}

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "omega_res": self.omega_res,
            "x2": self.x2,
            "mu_n": self.mu_n,
            "d_n": self.d_n,
            "quasienergies": list(self.quasienergies),
        }


def dipole_splitting(model: AtomModel, n: int) -> QuantumPair:
    """
    Splitting of the crossing pair by the dipole term of the core potential.

    The core sits at its classical equilibrium R0 = (-x2, 0, 0) for
    omega = resonance_omega(n). The analytic bare element is cross-checked
    against quadrature.

    Raises
    ------
    ConsistencyError
        If analytic and quadrature elements differ by more than 1e-6 relative.
    """
    n = _check_n(n, 3)
    w = resonance_omega(n)
    x2 = solve_equilibrium(model, w).x2
    mu = matrix_element(n, n - 1, "x", -3.0).real
    check = matrix_element_quadrature(n, n - 1, "x", -3.0).real
    if abs(mu - check) > CONSISTENCY_RTOL * abs(mu):
        raise ConsistencyError(f"analytic element {mu} disagrees with quadrature {check}")
    d = -x2 * (model.Z - 1) * mu
    centre = energy(n) - (n - 1) * w
    return QuantumPair(n=n, omega_res=w, x2=x2, mu_n=mu, d_n=d, quasienergies=(centre - d, centre + d))


def interaction_matrix(model: AtomModel, n: int, n_r: int = 160, n_theta: int = 48, n_phi: int = 64) -> np.ndarray:
    """
    2x2 matrix of H1 = (Z-1) R0 . r / |r|^3 in the basis (|n>, |n-1>) by a
    brute-force 3D product quadrature over the full wavefunctions.

    Gauss-Legendre in r (on [0, 8 n^2]) and theta, uniform in phi. Used as
    an independent check of the selection rules and the off-diagonal value.
    """
    n = _check_n(n, 3)
    x2 = solve_equilibrium(model, resonance_omega(n)).x2
    rn, rw = np.polynomial.legendre.leggauss(n_r)
    rmax = 8.0 * n**2
    r = 0.5 * rmax * (rn + 1)
    rw = 0.5 * rmax * rw
    tn, tw = np.polynomial.legendre.leggauss(n_theta)
    th = 0.5 * np.pi * (tn + 1)
    tw = 0.5 * np.pi * tw
    ph = np.arange(n_phi) * (2 * np.pi / n_phi)
    pw = 2 * np.pi / n_phi
    R, T, P = np.meshgrid(r, th, ph, indexing="ij")
    W = (rw[:, None, None] * tw[None, :, None] * pw) * R**2 * np.sin(T)
    states = [circular_wavefunction(m, R, T) * np.exp(1j * (m - 1) * P) for m in (n, n - 1)]
    H1 = -(model.Z - 1) * x2 * np.sin(T) * np.cos(P) / R**2
    out = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            out[i, j] = np.sum(W * np.conj(states[i]) * H1 * states[j])
    return out


# ---------------------------------------------------------------------------
# densities


@dataclass
class DensityGrid:
    """
    Electron density sampled on a section through the atom.

    ``plane`` is ``"xy"`` (values shape ``(resolution, resolution)`` indexed
    ``[iy, ix]``) or ``"x"`` (values along the x axis, with ``effective``
    holding r^2 rho).
    """

    plane: str
    extent: float
    resolution: int
    x: np.ndarray
    y: np.ndarray | None
    values: np.ndarray
    effective: np.ndarray | None = field(default=None, repr=False)


def _superposition_density(n: int, sign: int, x, y, z, phase: float = 0.0):
    rho_cyl = np.hypot(x, y)
    r = np.sqrt(rho_cyl**2 + z**2)
    a = _cylindrical_form(n, rho_cyl, r)
    b = _cylindrical_form(n - 1, rho_cyl, r)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_phi = np.where(rho_cyl > 0, x / np.where(rho_cyl > 0, rho_cyl, 1.0), 1.0)
        sin_phi = np.where(rho_cyl > 0, y / np.where(rho_cyl > 0, rho_cyl, 1.0), 0.0)
    # cos(phi - phase)
    cross = cos_phi * math.cos(phase) + sin_phi * math.sin(phase)
    return 0.5 * (a * a + b * b) + sign * a * b * cross


def _parse_sign(sign) -> int:
    if sign in (1, "+", "plus"):
        return 1
    if sign in (-1, "-", "minus"):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def density(n: int, sign, x, y, z=0.0, frame: str = "rotating", t: float = 0.0, omega: float | None = None):
    """
    Probability density of |n+> or |n-> at Cartesian points.

    In the lab frame the pattern is the rotating-frame one turned by the
    angle omega*t; ``omega`` defaults to the resonance frequency.
    """
    n = _check_n(n, 2)
    s = _parse_sign(sign)
    if frame == "rotating":
        phase = 0.0
    elif frame == "lab":
        phase = (resonance_omega(n) if omega is None else omega) * t
    else:
        raise ValueError(f"frame must be 'rotating' or 'lab', got {frame!r}")
    x, y, z = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float), np.asarray(z, float))
    return _superposition_density(n, s, x, y, z, phase)


def localized_density(
    n: int,
    sign="-",
    frame: str = "rotating",
    t: float = 0.0,
    plane: str = "xy",
    extent: float | None = None,
    resolution: int = 200,
    omega: float | None = None,
) -> DensityGrid:
    """Sample the |n+-> density on the xy plane or along the x axis."""
    n = _check_n(n, 2)
    if extent is None:
        extent = 2.5 * n**2
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    xs = np.linspace(-extent, extent, resolution)
    if plane == "xy":
        X, Y = np.meshgrid(xs, xs)
        vals = density(n, sign, X, Y, 0.0, frame=frame, t=t, omega=omega)
        return DensityGrid("xy", extent, resolution, xs, xs.copy(), vals)
    if plane == "x":
        vals = density(n, sign, xs, 0.0, 0.0, frame=frame, t=t, omega=omega)
        return DensityGrid("x", extent, resolution, xs, None, vals, effective=xs**2 * vals)
    raise ValueError(f"plane must be 'xy' or 'x', got {plane!r}")


def density_normalization(n: int, sign="-", extent: float | None = None, resolution: int = 200) -> float:
    """Midpoint-rule integral of the density over the cube [-extent, extent]^3."""
    n = _check_n(n, 2)
    if extent is None:
        extent = 2.5 * n**2
    h = 2 * extent / resolution
    c = -extent + h * (np.arange(resolution) + 0.5)
    X, Y = np.meshgrid(c, c, indexing="ij")
    total = 0.0
    for z in c:
        total += float(np.sum(density(n, sign, X, Y, z)))
    return total * h**3


def localization_contrast(n: int, sign="-", n_phi: int = 720) -> float:
    """
    Ratio max/min of the in-plane density on the ring through its maximum.

    The ring radius is the in-plane radius of the density maximum, found
    along the azimuth of strongest localization.
    """
    n = _check_n(n, 2)
    s = _parse_sign(sign)
    phi_peak = 0.0 if s * _cs_sign(n - 1) * _cs_sign(n - 2) > 0 else math.pi
    res = minimize_scalar(
        lambda rr: -density(n, s, rr * math.cos(phi_peak), rr * math.sin(phi_peak)),
        bounds=(0.1, 3.0 * n**2),
        method="bounded",
        options={"xatol": 1e-10},
    )
    ring = res.x
    phi = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    vals = density(n, s, ring * np.cos(phi), ring * np.sin(phi))
    return float(vals.max() / vals.min())


def localization_azimuth(n: int, sign="-", n_phi: int = 720) -> float:
    """Azimuth in [0, 2 pi) where the ring density at r = n^2 peaks."""
    phi = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    r = float(n * n)
    vals = density(n, sign, r * np.cos(phi), r * np.sin(phi))
    return float(phi[np.argmax(vals)])


# ---------------------------------------------------------------------------
# core wavefunction


@dataclass(frozen=True)
class CoreGaussian:
    """
    Ground state of the core for a frozen electron at position r.

    phi(R) = (gamma/pi)^(3/4) exp(-gamma/2 |R + g|^2 + i m_c omega . (R x g)).
    The amplitude prefactor is the square root of the density normalization
    (gamma/pi)^(3/2).
    """

    gamma: float
    kappa: float
    omega: float
    g: np.ndarray
    m_c: float

    @property
    def density_normalization(self) -> float:
        return (self.gamma / math.pi) ** 1.5

    @property
    def mean_position(self) -> np.ndarray:
        return -self.g

    def amplitude(self, R) -> np.ndarray:
        R = np.asarray(R, dtype=float)
        shifted = R + self.g
        phase = self.m_c * self.omega * (R[..., 0] * self.g[1] - R[..., 1] * self.g[0])
        return (self.gamma / math.pi) ** 0.75 * np.exp(-0.5 * self.gamma * np.sum(shifted**2, axis=-1) + 1j * phase)


def _g_vector(model: AtomModel, omega: float, kappa: float, r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    rn = np.linalg.norm(r, axis=-1)[..., None]
    scale = (model.Z - 1) / (model.m_c * omega**2 * rn**3)
    denom = np.array([kappa - 1, kappa - 1, kappa])
    return scale * r / denom


def core_gaussian(model: AtomModel, omega: float, r) -> CoreGaussian:
    """
    Shifted-Gaussian core state for electron position ``r``.

    Raises DomainError for omega <= 0, r = 0, or the resonance kappa = 1
    where the transverse shift diverges.
    """
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    r = np.asarray(r, dtype=float).reshape(3)
    if not np.linalg.norm(r) > 0:
        raise DomainError("electron position must be nonzero")
    gamma = math.sqrt(model.k * model.m_c)
    kappa = model.k / (model.m_c * omega**2)
    if abs(kappa - 1.0) < 1e-12:
        raise DomainError("kappa = 1: core driven at its own frequency")
    return CoreGaussian(gamma=gamma, kappa=kappa, omega=omega, g=_g_vector(model, omega, kappa, r), m_c=model.m_c)


def expected_core_dot_electron(model: AtomModel, n: int, sign="-", n_r: int = 200, n_theta: int = 96) -> float:
    """
    <R . r> = -<g(r) . r> in the state |n+->, by spherical product quadrature.

    The azimuthal average is analytic because g . r does not depend on phi.
    """
    n = _check_n(n, 2)
    w = resonance_omega(n)
    kappa = model.k / (model.m_c * w**2)
    if abs(kappa - 1.0) < 1e-12:
        raise DomainError("kappa = 1: core driven at its own frequency")
    rn, rw = np.polynomial.legendre.leggauss(n_r)
    rmax = 8.0 * n**2
    r = 0.5 * rmax * (rn + 1)
    rw = 0.5 * rmax * rw
    tn, tw = np.polynomial.legendre.leggauss(n_theta)
    th = 0.5 * np.pi * (tn + 1)
    tw = 0.5 * np.pi * tw
    Rg, Tg = np.meshgrid(r, th, indexing="ij")
    a = circular_wavefunction(n, Rg, Tg)
    b = circular_wavefunction(n - 1, Rg, Tg)
    # the cross term integrates to zero over phi, leaving the mean of the two densities
    rho_avg = 0.5 * (a * a + b * b) * 2 * np.pi
    g_dot_r = (model.Z - 1) / (model.m_c * w**2 * Rg) * (np.sin(Tg) ** 2 / (kappa - 1) + np.cos(Tg) ** 2 / kappa)
    W = rw[:, None] * tw[None, :] * Rg**2 * np.sin(Tg)
    _parse_sign(sign)
    return float(-np.sum(W * rho_avg * g_dot_r))


# ---------------------------------------------------------------------------
# radiative decay


@dataclass(frozen=True)
class DecayChannel:
    final_state: str
    polarization: str
    dipole: np.ndarray = field(repr=False)
    matrix_element: complex
    photon_energy_rotating: float
    photon_energy_lab: float

    def to_dict(self) -> dict:
        return {
            "final_state": self.final_state,
            "polarization": self.polarization,
            "matrix_element": {"re": self.matrix_element.real, "im": self.matrix_element.imag},
            "photon_energy_rotating": self.photon_energy_rotating,
            "photon_energy_lab": self.photon_energy_lab,
        }


def classify_polarization(d, tol: float = 1e-9) -> str:
    """
    ``linear`` if the complex dipole vector has a real direction, ``circular``
    if d . d vanishes, ``elliptical`` otherwise, ``none`` if it is zero.
    """
    d = np.asarray(d, dtype=complex)
    size = float(np.vdot(d, d).real)
    if size == 0.0:
        return "none"
    if abs(np.dot(d, d)) <= tol * size:
        return "circular"
    if np.linalg.norm(np.cross(d.real, d.imag)) <= tol * size:
        return "linear"
    return "elliptical"


def decay_observables(model: AtomModel, n: int = 5) -> list[DecayChannel]:
    """
    The two dipole channels out of the lower state |n->.

    (a) |n-> -> |n+>: photon energy -2 d_n in the rotating frame;
    (b) |n-> -> |n-2, n-3, n-3>: photon energy 2E_{n-1} - E_n - E_{n-2} - d_n.
    Both shift by omega in the lab frame because the emitted photon carries
    one unit of angular momentum about the rotation axis.
    """
    n = _check_n(n, 3)
    pair = dipole_splitting(model, n)
    d, w = pair.d_n, pair.omega_res
    s = 1.0 / math.sqrt(2.0)

    def el(bra, ket, op):
        return matrix_element(bra, ket, op)

    # |n+-> = (|n> +- |n-1>)/sqrt2
    lin = np.array(
        [
            0.5 * (el(n, n, op) - el(n, n - 1, op) + el(n - 1, n, op) - el(n - 1, n - 1, op))
            for op in ("x", "y", "z")
        ]
    )
    circ = np.array([s * (el(n - 2, n, op) - el(n - 2, n - 1, op)) for op in ("x", "y", "z")])
    circ_element = complex(circ[0] - 1j * circ[1])
    rot_lin = -2.0 * d
    rot_circ = 2 * energy(n - 1) - energy(n) - energy(n - 2) - d
    return [
        DecayChannel(
            final_state=f"|{n}+>",
            polarization=classify_polarization(lin),
            dipole=lin,
            matrix_element=complex(lin[1]),
            photon_energy_rotating=rot_lin,
            photon_energy_lab=rot_lin + w,
        ),
        DecayChannel(
            final_state=f"|{n - 2},{n - 3},{n - 3}>",
            polarization=classify_polarization(circ),
            dipole=circ,
            matrix_element=circ_element,
            photon_energy_rotating=rot_circ,
            photon_energy_lab=rot_circ + w,
        ),
    ]
