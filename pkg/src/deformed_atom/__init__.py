"""Classical and quantum model of a Rydberg electron orbiting a deformable ion core."""

from .equilibrium import EquilibriumConfig, solve_equilibrium, solve_equilibrium_finite_mass
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateModeError,
    DomainError,
    IntegrationError,
)
from .params import AtomModel, k_from_polarizability, magnesium_preset

__all__ = [
    "AtomModel",
    "ConsistencyError",
    "ConvergenceError",
    "DegenerateModeError",
    "DomainError",
    "EquilibriumConfig",
    "IntegrationError",
    "k_from_polarizability",
    "magnesium_preset",
    "solve_equilibrium",
    "solve_equilibrium_finite_mass",
]

__version__ = "0.1.0"
