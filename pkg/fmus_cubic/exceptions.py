"""
Exception hierarchy for fmus-cubic.

Invalid inputs raise DomainError, which is also a ValueError so callers that
already catch ValueError keep working. Numerical failures raise NumericalError.
"""


class CubicModelError(Exception):
    """Base class for all fmus-cubic errors."""


class DomainError(CubicModelError, ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class NumericalError(CubicModelError, ArithmeticError):
    """Raised when a numerical procedure fails to produce a trustworthy value."""


class MonotonicityError(NumericalError):
    """Raised when a survival function is found increasing in time."""
