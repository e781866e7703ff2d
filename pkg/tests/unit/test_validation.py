"""
Unit tests for the validation utilities.
"""

import math
import unittest

from fmus_cubic.exceptions import CubicModelError, DomainError
from fmus_cubic.utils.validation import (
    is_count,
    is_finite_number,
    is_open_unit,
    is_positive,
    require_at_least,
    require_count,
    require_open_unit,
    require_optional_count,
    require_positive,
)


class TestValidation(unittest.TestCase):
    """Test cases for validation predicates and require helpers."""

    def test_is_finite_number(self):
        """Test finite number detection."""
        self.assertTrue(is_finite_number(1))
        self.assertTrue(is_finite_number(-2.5))
        self.assertFalse(is_finite_number(math.nan))
        self.assertFalse(is_finite_number(math.inf))
        self.assertFalse(is_finite_number("1.0"))
        self.assertFalse(is_finite_number(True))

    def test_is_positive_and_open_unit(self):
        """Test positivity and unit-interval predicates."""
        self.assertTrue(is_positive(1e-12))
        self.assertFalse(is_positive(0))
        self.assertTrue(is_open_unit(0.5))
        self.assertFalse(is_open_unit(0.0))
        self.assertFalse(is_open_unit(1.0))

    def test_is_count(self):
        """Test integer count detection."""
        self.assertTrue(is_count(3))
        self.assertTrue(is_count(0, minimum=0))
        self.assertFalse(is_count(0))
        self.assertFalse(is_count(2.0))
        self.assertFalse(is_count(False, minimum=0))

    def test_require_helpers_return_values(self):
        """Test that require helpers return the validated value."""
        self.assertEqual(require_positive("rtt", 2), 2.0)
        self.assertIsInstance(require_positive("rtt", 2), float)
        self.assertEqual(require_open_unit("p", 0.01), 0.01)
        self.assertEqual(require_at_least("w0", 1, 1.0), 1.0)
        self.assertEqual(require_count("n", 5), 5)
        self.assertIsNone(require_optional_count("w_max", None))

    def test_require_helpers_raise(self):
        """Test that invalid values raise DomainError naming the parameter."""
        with self.assertRaises(DomainError) as ctx:
            require_open_unit("p", 0)
        self.assertIn("p", str(ctx.exception))
        with self.assertRaises(DomainError):
            require_positive("rtt", -1.0)
        with self.assertRaises(DomainError):
            require_count("n_rtts", 0)
        with self.assertRaises(DomainError):
            require_optional_count("w_max", 0)

    def test_domain_error_is_value_error(self):
        """Test that DomainError can be caught as ValueError."""
        with self.assertRaises(ValueError):
            require_positive("c", 0.0)
        self.assertTrue(issubclass(DomainError, CubicModelError))


if __name__ == "__main__":
    unittest.main()
