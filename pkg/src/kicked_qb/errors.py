"""Exception types raised across the package."""


class KickedQBError(Exception):
    """Base class for all package errors."""


class InvalidSizeError(KickedQBError, ValueError):
    """Chain length outside the range an operation supports."""


class ConfigError(KickedQBError, ValueError):
    """Inconsistent or out-of-range run configuration."""


class StateValidityError(KickedQBError, ValueError):
    """A density matrix is not a valid state within tolerance."""


class NumericalError(KickedQBError, ArithmeticError):
    """A numerical routine failed to reach the requested accuracy."""


class IntegratorDivergence(NumericalError):
    """Trace or Hermiticity drifted beyond tolerance during integration."""


class ConsistencyError(NumericalError):
    """An expectation value carries an unexpected imaginary residue."""


class DegenerateFunctionalError(NumericalError):
    """A parity-weighted average is undefined because its normalisation vanishes."""
