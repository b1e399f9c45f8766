"""Exception hierarchy shared across the package.

Numerical failures are split into two classes so that callers (and the CLI
exit-code mapping) can distinguish mathematical non-existence of an integral
from plain resource exhaustion.
"""


class NumericalError(Exception):
    """Base class for quadrature/solver failures."""


class NonConvergence(NumericalError):
    """The subdivision budget was exhausted before reaching the tolerance."""


class Divergence(NumericalError):
    """The quantity does not exist: an integral diverges at an endpoint."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class InsufficientData(RuntimeError):
    """A Monte Carlo conditional estimate has an empty subsample."""
