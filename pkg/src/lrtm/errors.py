"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class ScatteringError(Exception):
    """Base class for numerical failures raised by this package."""


class DomainError(ScatteringError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class LongRangeError(DomainError):
    """A limit was requested that does not exist for a long-range potential."""


class ConvergenceError(ScatteringError):
    """Quadrature, extrapolation or a series failed to reach its tolerance."""


class IntegrationError(ScatteringError):
    """The ODE integrator failed (step underflow, step budget exhausted)."""


class SpectralSingularityError(ScatteringError):
    """The (2,2) entry of a transfer matrix vanishes, so amplitudes diverge."""


class ConsistencyError(ScatteringError):
    """An identity that must hold exactly was violated beyond tolerance."""
