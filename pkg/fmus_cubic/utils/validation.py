"""
Validation utilities for fmus-cubic.

The ``is_*`` predicates return booleans; the ``require_*`` helpers raise
:class:`~fmus_cubic.exceptions.DomainError` and return the validated value so
they can be used inline.
"""

import math
from numbers import Integral, Real
from typing import Any, Optional

from fmus_cubic.exceptions import DomainError


def is_finite_number(value: Any) -> bool:
    """
    Check if a value is a finite real number (bools excluded).

    Args:
        value: The value to check.

    Returns:
        bool: True if finite real, False otherwise.
    """
    if isinstance(value, bool) or not isinstance(value, Real):
        return False
    return math.isfinite(float(value))


def is_positive(value: Any) -> bool:
    """
    Check if a value is a finite number strictly greater than zero.

    Args:
        value: The value to check.

    Returns:
        bool: True if positive, False otherwise.
    """
    return is_finite_number(value) and value > 0


def is_non_negative(value: Any) -> bool:
    """Check if a value is a finite number greater than or equal to zero."""
    return is_finite_number(value) and value >= 0


def is_open_unit(value: Any) -> bool:
    """
    Check if a value lies in the open interval (0, 1).

    Probabilities of loss, back-off fractions and uniform variates all live
    here.

    Args:
        value: The value to check.

    Returns:
        bool: True if 0 < value < 1, False otherwise.
    """
    return is_finite_number(value) and 0 < value < 1


def is_count(value: Any, minimum: int = 1) -> bool:
    """
    Check if a value is an integer count no smaller than ``minimum``.

    Args:
        value: The value to check.
        minimum (int): Smallest admissible count.

    Returns:
        bool: True if valid count, False otherwise.
    """
    return isinstance(value, Integral) and not isinstance(value, bool) and value >= minimum


def require_positive(name: str, value: Any) -> float:
    """
    Return ``value`` as float or raise if it is not strictly positive.

    Raises:
        DomainError: If the value is not a positive finite number.
    """
    if not is_positive(value):
        raise DomainError(f"{name} must be > 0, got {value!r}")
    return float(value)


def require_non_negative(name: str, value: Any) -> float:
    """
    Return ``value`` as float or raise if it is negative.

    Raises:
        DomainError: If the value is negative or not finite.
    """
    if not is_non_negative(value):
        raise DomainError(f"{name} must be >= 0, got {value!r}")
    return float(value)


def require_open_unit(name: str, value: Any) -> float:
    """
    Return ``value`` as float or raise if it is outside (0, 1).

    Raises:
        DomainError: If the value is not strictly between 0 and 1.
    """
    if not is_open_unit(value):
        raise DomainError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def require_at_least(name: str, value: Any, lower: float) -> float:
    """
    Return ``value`` as float or raise if it is below ``lower``.

    Raises:
        DomainError: If the value is smaller than ``lower`` or not finite.
    """
    if not is_finite_number(value) or value < lower:
        raise DomainError(f"{name} must be >= {lower}, got {value!r}")
    return float(value)


def require_count(name: str, value: Any, minimum: int = 1) -> int:
    """
    Return ``value`` as int or raise if it is not a count >= ``minimum``.

    Raises:
        DomainError: If the value is not an integer or is too small.
    """
    if not is_count(value, minimum):
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def require_optional_count(name: str, value: Optional[Any], minimum: int = 1) -> Optional[int]:
    """Like :func:`require_count` but lets ``None`` through."""
    if value is None:
        return None
    return require_count(name, value, minimum)
