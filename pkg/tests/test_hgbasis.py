import math
import unittest
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np

from models import HermiteGaussEval
from utils.errors import NumericalGuardError
from utils.hgbasis import (
    QuadratureWindowError,
    build_quadrature,
    evaluate,
    hermite_functions,
    hg_eval,
    hg_stack,
    quadrature_points,
    turning_point,
)

# Waveguide scale sqrt(k*omega) for n0=1.5, omega=0.007, lambda=0.63
WAVEGUIDE_SCALE = math.sqrt(2.0 * math.pi / 0.63 * 0.007)


def exact_hermite_function(n: int, u: Fraction) -> float:
    """phi_n(u) from the exact integer Hermite polynomial, normalized in high precision."""
    h_prev, h = Fraction(1), 2 * u
    if n == 0:
        h = Fraction(1)
    for j in range(1, n):
        h_prev, h = h, 2 * u * h - 2 * j * h_prev

    getcontext().prec = 60
    u_dec = Decimal(u.numerator) / Decimal(u.denominator)
    h_dec = Decimal(h.numerator) / Decimal(h.denominator)
    norm = (Decimal(2 ** n) * Decimal(math.factorial(n))).sqrt()
    value = h_dec / norm * (-(u_dec * u_dec) / 2).exp()
    return float(value) * math.pi ** -0.25


class HermiteFunctionTestCase(unittest.TestCase):
    """Values of the normalized Hermite functions."""

    def test_ground_state_peak(self):
        self.assertAlmostEqual(hg_eval(0, 1.0, 0.0, 0.0), math.pi ** -0.25, places=14)

    def test_odd_order_vanishes_at_center(self):
        self.assertEqual(hg_eval(1, 1.0, 0.0, 0.0), 0.0)
        self.assertAlmostEqual(hg_eval(7, 0.3, 4.0, 4.0), 0.0, places=15)

    def test_evaluate_description(self):
        fn = HermiteGaussEval(order=3, scale=0.5, center=2.0)
        self.assertEqual(evaluate(fn, 3.0), hg_eval(3, 0.5, 2.0, 3.0))
        np.testing.assert_array_equal(evaluate(fn, [1.0, 3.0]), hg_eval(3, 0.5, 2.0, np.array([1.0, 3.0])))

    def test_order_50_matches_exact_series(self):
        u = Fraction(37, 10)
        exact = exact_hermite_function(50, u)
        value = hg_eval(50, 1.0, 0.0, 3.7)
        self.assertLess(abs(value - exact), 1e-10 * abs(exact) + 1e-15)

    def test_recurrence_matches_exact_values(self):
        for u in (Fraction(-23, 10), Fraction(1, 2), Fraction(61, 10)):
            table = hermite_functions(60, [float(u)])[:, 0]
            for n in (0, 1, 2, 5, 17, 33, 60):
                with self.subTest(n=n, u=float(u)):
                    exact = exact_hermite_function(n, u)
                    self.assertLess(abs(table[n] - exact), 1e-10 * abs(exact) + 1e-14)

    def test_scale_and_center(self):
        s, center = 0.4, 3.0
        x = np.linspace(-10.0, 15.0, 11)
        expected = math.sqrt(s) * hermite_functions(4, s * (x - center))[4]
        np.testing.assert_allclose(hg_eval(4, s, center, x), expected, rtol=0, atol=1e-15)

    def test_high_order_stays_finite(self):
        x = np.linspace(-400.0, 400.0, 4001)
        values = hg_eval(1500, WAVEGUIDE_SCALE, 0.0, x)
        self.assertTrue(np.all(np.isfinite(values)))
        self.assertLessEqual(float(np.max(np.abs(values))), math.sqrt(WAVEGUIDE_SCALE))

    def test_far_tail_underflows_to_zero(self):
        self.assertEqual(hg_eval(3, 1.0, 0.0, 60.0), 0.0)

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            hg_eval(0, 0.0, 0.0, 1.0)
        with self.assertRaises(ValueError):
            hg_eval(0, -1.0, 0.0, 1.0)
        with self.assertRaises(ValueError):
            hg_eval(2, 1.0, 0.0, float("nan"))
        with self.assertRaises(ValueError):
            hg_eval(2, 1.0, 0.0, [0.0, float("inf")])
        with self.assertRaises(ValueError):
            hermite_functions(-1, 0.0)

    def test_turning_point(self):
        self.assertAlmostEqual(turning_point(4, 0.5), 6.0)


class QuadratureTestCase(unittest.TestCase):
    """Composite rules on finite windows."""

    def setUp(self):
        self.rule = build_quadrature(-120.0, 120.0, 4801)

    def test_gaussian_integral(self):
        x = self.rule.nodes
        value = self.rule.integrate(np.exp(-x ** 2 / 25.0))
        self.assertAlmostEqual(value / (5.0 * math.sqrt(math.pi)), 1.0, places=12)

    def test_odd_integrand(self):
        x = self.rule.nodes
        self.assertAlmostEqual(self.rule.integrate(x * np.exp(-x ** 2 / 25.0)), 0.0, places=10)

    def test_normalized_gaussians_across_scales(self):
        x = self.rule.nodes
        for s in (1.0 / 20.0, WAVEGUIDE_SCALE, 0.3464, 1.0):
            with self.subTest(s=s):
                value = self.rule.integrate(np.exp(-(x * s) ** 2) * s / math.sqrt(math.pi))
                self.assertAlmostEqual(value, 1.0, places=12)

    def test_third_order_norm(self):
        values = hg_eval(3, 0.2, 5.0, self.rule.nodes)
        self.assertAlmostEqual(self.rule.integrate(values ** 2), 1.0, places=12)

    def test_trapezoid_rule(self):
        rule = build_quadrature(-120.0, 120.0, 4800, rule="trapezoid")
        value = rule.integrate(np.exp(-rule.nodes ** 2 / 25.0))
        self.assertAlmostEqual(value / (5.0 * math.sqrt(math.pi)), 1.0, places=12)

    def test_orthonormality_at_waveguide_scale(self):
        half = turning_point(200, WAVEGUIDE_SCALE) + 40.0
        rule = build_quadrature(-half, half, quadrature_points(half, 0.05))
        psi = hg_stack(200, WAVEGUIDE_SCALE, 0.0, rule.nodes)
        gram = (psi * rule.weights) @ psi.T
        self.assertLess(float(np.max(np.abs(gram - np.eye(201)))), 1e-10)

    def test_window_must_cover_support(self):
        with self.assertRaises(QuadratureWindowError) as ctx:
            build_quadrature(-10.0, 10.0, 101, cover=(-12.0, 5.0))
        self.assertIsInstance(ctx.exception, NumericalGuardError)

        rule = build_quadrature(-10.0, 10.0, 101, cover=(-10.0, 10.0))
        self.assertEqual(rule.nodes.size, 101)

    def test_invalid_windows(self):
        with self.assertRaises(ValueError):
            build_quadrature(5.0, 5.0, 11)
        with self.assertRaises(ValueError):
            build_quadrature(0.0, 1.0, 2)
        with self.assertRaises(ValueError):
            build_quadrature(0.0, 1.0, 10)  # even count under Simpson
        with self.assertRaises(ValueError):
            build_quadrature(0.0, 1.0, 11, rule="gauss")

    def test_quadrature_points_are_odd_for_simpson(self):
        self.assertEqual(quadrature_points(10.0, 0.05) % 2, 1)
        self.assertEqual(quadrature_points(10.0, 0.05, rule="trapezoid"), 401)
        self.assertEqual(quadrature_points(0.01, 1.0), 3)


if __name__ == '__main__':
    unittest.main()
