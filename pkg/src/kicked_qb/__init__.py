"""Charging dynamics of a kicked-Ising quantum battery.

Submodules
----------
modes
    Momentum grids and closed-form Floquet powers of the pair modes.
thermal
    Parity-resolved thermal averages of the injected energy.
dephasing
    Linear-size moment equations with local dephasing.
dense
    Full Hilbert-space Lindblad reference for small chains.
ergotropy
    Passive states and extractable work.
cli
    Command-line front end (``kicked-qb``).
"""
from .errors import (
    ConfigError,
    ConsistencyError,
    DegenerateFunctionalError,
    IntegratorDivergence,
    InvalidSizeError,
    KickedQBError,
    NumericalError,
    StateValidityError,
)
from .modes import Sector, build_grid
from .thermal import SELF_DUAL, Charger, ThermalParams, thermal_energy

__version__ = "0.1.0"

__all__ = [
    "Charger",
    "ThermalParams",
    "SELF_DUAL",
    "Sector",
    "build_grid",
    "thermal_energy",
    "KickedQBError",
    "ConfigError",
    "ConsistencyError",
    "DegenerateFunctionalError",
    "IntegratorDivergence",
    "InvalidSizeError",
    "NumericalError",
    "StateValidityError",
    "__version__",
]
