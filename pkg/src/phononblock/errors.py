"""Exception and warning types raised across the package."""


class PhononBlockError(Exception):
    """Base class for all package errors."""


class NoSteadyState(PhononBlockError):
    """Neither solver path produced a state with an acceptable residual."""


class NonPositive(PhononBlockError):
    """The steady state has a significantly negative eigenvalue."""


class IntegrationFailure(PhononBlockError):
    """The time integrator could not reach the requested final time."""


class VacuumDenominator(PhononBlockError, ZeroDivisionError):
    """A normalized correlation was requested for an (almost) empty mode."""


class DegenerateDenominator(PhononBlockError, ZeroDivisionError):
    """A closed-form expression hit a vanishing denominator."""


class NoRoot(PhononBlockError):
    """The root bracket does not contain a sign change."""


class UndrivenSystem(PhononBlockError):
    """A drive-dependent quantity was requested with zero drive."""


class ConfigError(PhononBlockError, ValueError):
    """Malformed or inconsistent run configuration."""


class TruncationWarning(UserWarning):
    """The Fock truncation is likely too small for the thermal occupancy."""
