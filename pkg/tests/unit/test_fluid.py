"""
Unit tests for the deterministic-loss fluid model.
"""

import math
import unittest

import numpy as np
from scipy.integrate import quad

from fmus_cubic.core.params import CubicParams, NetworkPath
from fmus_cubic.exceptions import DomainError
from fmus_cubic.models.fluid import (
    accumulated_packets_integral,
    convergence_constant,
    fixed_point,
    inter_loss_time,
    iterate_loss_map,
    lemma5_check,
    loss_map,
    mean_window_fluid,
    solve,
    tau_of_x,
)

# (p, R=1) -> published fluid mean window
FLUID_R1 = {1e-2: 33.33, 5e-3: 56.05, 1e-3: 187.40, 5e-4: 315.17, 8e-5: 1245.81}


class TestClosedForms(unittest.TestCase):
    """Test cases for the fixed point, mean window and period."""

    def test_published_mean_windows(self):
        """Test the fluid mean window on the R = 1 row of the comparison table."""
        params = CubicParams()
        for p, expected in FLUID_R1.items():
            with self.subTest(p=p):
                value = mean_window_fluid(params, NetworkPath(rtt=1.0, drop_prob=p))
                self.assertLess(abs(value - expected) / expected, 0.005)

    def test_beta_02_mean_window(self):
        """Test the fluid mean window with beta = 0.2."""
        value = mean_window_fluid(CubicParams(beta=0.2), NetworkPath(rtt=1.0, drop_prob=1e-2))
        self.assertLess(abs(value - 37.13) / 37.13, 0.005)

    def test_fixed_point_identities(self):
        """Test E[W] = x*(4-beta)/4, E[W]*tau/R = 1/p and tau(x*) = period."""
        rng = np.random.default_rng(2024)
        for _ in range(200):
            params = CubicParams(c=rng.uniform(0.1, 1.0), beta=rng.uniform(0.1, 0.9))
            path = NetworkPath(rtt=rng.uniform(0.05, 1.0), drop_prob=10 ** rng.uniform(-5, -2))
            x_star = fixed_point(params, path)
            mean = mean_window_fluid(params, path)
            tau = inter_loss_time(params, path)
            self.assertTrue(math.isclose(mean, x_star * (4 - params.beta) / 4, rel_tol=1e-9))
            self.assertTrue(math.isclose(mean * tau / path.rtt, 1 / path.drop_prob, rel_tol=1e-9))
            self.assertTrue(math.isclose(tau_of_x(params, path, x_star), tau, rel_tol=1e-8))

    def test_solve_bundles_closed_forms(self):
        """Test the FluidSolution bundle."""
        params, path = CubicParams(), NetworkPath(rtt=0.2, drop_prob=5e-3)
        solution = solve(params, path)
        self.assertAlmostEqual(solution.throughput, solution.mean_window / 0.2)
        self.assertEqual(set(solution.to_dict()), {"x_star", "tau", "mean_window", "throughput"})

    def test_accumulated_packets_integral(self):
        """Test the closed-form integral against numerical quadrature."""
        params = CubicParams()
        x, tau = 40.0, 3.0
        j = (params.beta * x / params.c) ** (1 / 3)
        numeric, _ = quad(lambda t: params.c * (t - j) ** 3 + x, 0.0, tau)
        self.assertAlmostEqual(accumulated_packets_integral(params, x, tau), numeric, places=6)

    def test_tau_of_x_domain(self):
        """Test that windows below one packet are rejected."""
        with self.assertRaises(DomainError):
            tau_of_x(CubicParams(), NetworkPath(), 0.5)


class TestLossMap(unittest.TestCase):
    """Test cases for the loss map and its convergence."""

    def setUp(self):
        self.params = CubicParams()
        self.path = NetworkPath(rtt=1.0, drop_prob=1e-2)
        self.x_star = fixed_point(self.params, self.path)

    def test_fixed_point_is_stationary(self):
        """Test that iterating from x* stays at x*."""
        trajectory = iterate_loss_map(self.params, self.path, self.x_star, 10)
        self.assertEqual(len(trajectory), 11)
        for x in trajectory:
            self.assertAlmostEqual(x / self.x_star, 1.0, places=9)

    def test_monotone_from_above(self):
        """Test monotone decrease towards x* from above."""
        trajectory = iterate_loss_map(self.params, self.path, 2 * self.x_star, 50)
        self.assertTrue(all(b < a for a, b in zip(trajectory, trajectory[1:])))
        self.assertTrue(all(x > self.x_star for x in trajectory))

    def test_monotone_from_below(self):
        """Test monotone increase towards x* from half the fixed point."""
        trajectory = iterate_loss_map(self.params, self.path, 0.5 * self.x_star, 50)
        self.assertTrue(all(b > a for a, b in zip(trajectory, trajectory[1:])))
        self.assertTrue(all(x < self.x_star for x in trajectory))

    def test_small_start_overshoots_then_decreases(self):
        """Test that a one-packet start jumps above x* and then decreases."""
        trajectory = iterate_loss_map(self.params, self.path, 1.0, 30)
        self.assertGreater(trajectory[1], self.x_star)
        tail = trajectory[1:]
        self.assertTrue(all(b < a for a, b in zip(tail, tail[1:])))

    def test_local_error_recursion(self):
        """Test e -> e - c*e**3 for a small relative error."""
        e = 0.005
        x_next = loss_map(self.params, self.path, self.x_star * (1 + e))
        e_next = x_next / self.x_star - 1
        ratio = (e - e_next) / e**3
        self.assertLess(abs(ratio - convergence_constant(self.params)) / ratio, 0.03)

    def test_algebraic_convergence_rate(self):
        """Test that relative errors decay like (2*c*k)**-0.5."""
        k = 2000
        trajectory = iterate_loss_map(self.params, self.path, 2 * self.x_star, k)
        e_k = trajectory[-1] / self.x_star - 1
        scaled = e_k * math.sqrt(2 * convergence_constant(self.params) * k)
        self.assertGreater(scaled, 0.9)
        self.assertLess(scaled, 1.2)

    def test_convergence_constant_value(self):
        """Test c = beta*(4-beta)**3/27 at beta = 0.3."""
        self.assertAlmostEqual(convergence_constant(self.params), 0.3 * 3.7**3 / 27)

    def test_iterate_domain(self):
        """Test argument validation."""
        with self.assertRaises(DomainError):
            iterate_loss_map(self.params, self.path, 10.0, -1)
        self.assertEqual(iterate_loss_map(self.params, self.path, 10.0, 0), [10.0])


class TestPowerInequality(unittest.TestCase):
    """Test cases for the power inequality used in the convergence proof."""

    def test_grid(self):
        """Test the inequality on a 100 x 100 grid."""
        for k in np.linspace(1.01, 1.99, 100):
            for x in np.logspace(-3, 3, 100):
                self.assertTrue(lemma5_check(float(k), float(x)), msg=f"k={k}, x={x}")

    def test_domain(self):
        """Test that k outside (1, 2) and x <= 0 are rejected."""
        with self.assertRaises(DomainError):
            lemma5_check(2.0, 1.0)
        with self.assertRaises(DomainError):
            lemma5_check(1.5, 0.0)


if __name__ == "__main__":
    unittest.main()
