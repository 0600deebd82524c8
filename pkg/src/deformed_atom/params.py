"""
Physical constants, the atom model and spring-constant calibration.

Everything inside the package is expressed in Hartree atomic units
(hbar = m_e = e^2/4 pi eps0 = 1). Conversions to eV or SI happen only at
the I/O boundary through the constants below.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

from .errors import DomainError

if TYPE_CHECKING:
    from .equilibrium import EquilibriumConfig

HARTREE_EV = 27.211386245988
BOHR_M = 5.29177210903e-11
HARTREE_J = 4.3597447222071e-18

# nucleus masses at or above this are treated as infinite
INFINITE_MASS = 1e10

MAGNESIUM_ALPHA = 34.62


@dataclass(frozen=True)
class AtomModel:
    """
    Parameters of the electron + core + nucleus model.

    Parameters
    ----------
    Z : int
        Nuclear charge number, at least 2.
    k : float
        Spring constant binding the core to the nucleus.
    m_c : float, optional
        Core mass. Defaults to ``(Z - 1) * m_e``.
    m_n : float
        Nucleus mass; ``math.inf`` selects the fixed-nucleus limit.
    """

    Z: int
    k: float
    m_c: float | None = None
    m_n: float = math.inf
    m_e: float = field(default=1.0, init=False)

    def __post_init__(self):
        if int(self.Z) != self.Z or self.Z < 2:
            raise DomainError(f"Z must be an integer >= 2, got {self.Z}")
        object.__setattr__(self, "Z", int(self.Z))
        if self.m_c is None:
            object.__setattr__(self, "m_c", (self.Z - 1) * self.m_e)
        if not self.k > 0 or not math.isfinite(self.k):
            raise DomainError(f"spring constant k must be positive and finite, got {self.k}")
        if not self.m_c > 0:
            raise DomainError(f"core mass must be positive, got {self.m_c}")
        if not self.m_n > 0:
            raise DomainError(f"nucleus mass must be positive, got {self.m_n}")

    @property
    def infinite_nucleus(self) -> bool:
        return self.m_n >= INFINITE_MASS

    @property
    def mu_e(self) -> float:
        """Electron-nucleus reduced mass."""
        if self.infinite_nucleus:
            return self.m_e
        return self.m_e * self.m_n / (self.m_e + self.m_n)

    @property
    def mu_c(self) -> float:
        """Core-nucleus reduced mass."""
        if self.infinite_nucleus:
            return self.m_c
        return self.m_c * self.m_n / (self.m_c + self.m_n)

    @property
    def inv_m_n(self) -> float:
        return 0.0 if self.infinite_nucleus else 1.0 / self.m_n

    @property
    def core_frequency(self) -> float:
        """Bare core oscillation frequency sqrt(k / m_c)."""
        return math.sqrt(self.k / self.m_c)

    @property
    def standard_core_mass(self) -> bool:
        return math.isclose(self.m_c, (self.Z - 1) * self.m_e, rel_tol=1e-14)

    def with_infinite_nucleus(self) -> AtomModel:
        return AtomModel(Z=self.Z, k=self.k, m_c=self.m_c, m_n=math.inf)

    def to_dict(self) -> dict:
        out = {
            "Z": self.Z,
            "m_c": self.m_c,
            "m_n": self.m_n,
            "k": self.k,
            "alpha_tilde": (self.Z - 1) ** 2 / self.k,
        }
        if not math.isfinite(self.m_n):
            out["m_n"] = None
        return out

    @classmethod
    def from_dict(cls, data: dict) -> AtomModel:
        """
        Build a model from a mapping with keys ``Z``, ``m_c``, ``m_n`` and
        either ``k`` or ``alpha_tilde``. When both are given ``k`` wins.
        ``m_n`` of ``None`` means an infinitely heavy nucleus.
        """
        if "Z" not in data:
            raise DomainError("model needs a 'Z' entry")
        Z = data["Z"]
        k = data.get("k")
        if k is None:
            if data.get("alpha_tilde") is None:
                raise DomainError("model needs either 'k' or 'alpha_tilde'")
            k = k_from_polarizability(Z, data["alpha_tilde"])
        m_n = data.get("m_n")
        return cls(
            Z=Z,
            k=float(k),
            m_c=None if data.get("m_c") is None else float(data["m_c"]),
            m_n=math.inf if m_n is None else float(m_n),
        )


@dataclass(frozen=True)
class Polarizability:
    """Rationalized static dipole polarizability alpha / (4 pi eps0), in bohr^3."""

    alpha_tilde: float

    def __post_init__(self):
        if not self.alpha_tilde > 0:
            raise DomainError(f"polarizability must be positive, got {self.alpha_tilde}")

    def spring_constant(self, Z: int) -> float:
        return k_from_polarizability(Z, self.alpha_tilde)

    @property
    def si(self) -> float:
        """Polarizability volume in m^3."""
        return self.alpha_tilde * BOHR_M**3


def k_from_polarizability(Z: int, alpha_tilde: float) -> float:
    """
    Spring constant reproducing a given static ion polarizability.

    A charge (Z-1) on a spring k shifts by (Z-1) E / k in a field E, which
    gives alpha = (Z-1)^2 / k.
    """
    if Z < 2:
        raise DomainError(f"Z must be >= 2, got {Z}")
    if not alpha_tilde > 0:
        raise DomainError(f"alpha_tilde must be positive, got {alpha_tilde}")
    return (Z - 1) ** 2 / alpha_tilde


def polarizability_at_equilibrium(model: AtomModel, config: EquilibriumConfig) -> float:
    """
    Induced dipole over the electron's field at a rotating equilibrium.

    Returns (Z-1) x1^3 delta (1+delta)^2, which tends to (Z-1)^2/k as the
    rotation frequency goes to zero.
    """
    if config.delta < 0:
        raise DomainError(f"delta must be non-negative, got {config.delta}")
    if config.delta == 0.0:
        return 0.0
    d = config.delta
    return (model.Z - 1) * config.x1**3 * d * (1.0 + d) ** 2


def core_energy_ev(model: AtomModel) -> float:
    """Core oscillation quantum hbar sqrt(k/m_c) in eV."""
    return model.core_frequency * HARTREE_EV


def magnesium_preset() -> AtomModel:
    """Magnesium: Z=12, core of 11 electrons, nucleus of 43710 m_e."""
    return AtomModel(Z=12, k=k_from_polarizability(12, MAGNESIUM_ALPHA), m_c=11.0, m_n=43710.0)


PRESETS = {"mg": magnesium_preset, "magnesium": magnesium_preset}


def load_model(path: str | Path) -> AtomModel:
    with open(path) as fh:
        return AtomModel.from_dict(json.load(fh))


def save_model(model: AtomModel, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh, indent=2)
        fh.write("\n")
