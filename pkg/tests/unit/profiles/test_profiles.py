import math
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from acwall.errors import DomainError, ValidationError
from acwall.profiles import (
    Domain,
    Profile,
    eval_h,
    eval_phi,
    eval_potential,
    eval_q,
    eval_wave,
    eval_wave_second,
    inner,
    log_h_difference,
    norm2,
    phi_coefficients,
    sech2,
    translation_mode,
    wave_profile,
)


def phi_residual(a: float, n: int) -> float:
    dom = Domain(a, a, n)
    phi = eval_phi(0.0, dom).values
    _, _, curvature = eval_potential(np.tanh(dom.interior()))
    second = (phi[2:] - 2.0 * phi[1:-1] + phi[:-2]) / dom.dx**2
    return float(np.max(np.abs(0.5 * second - curvature * phi[1:-1])))


class DomainTests(unittest.TestCase):
    def test_grid_spacing_and_interior(self) -> None:
        dom = Domain(1.0, 2.0, 7)

        self.assertEqual(dom.length, 3.0)
        self.assertAlmostEqual(dom.dx, 0.5)
        self.assertEqual(dom.interior_size, 5)
        self.assertEqual(dom.grid()[0], -1.0)
        self.assertEqual(dom.grid()[-1], 2.0)
        np.testing.assert_allclose(dom.interior(), [-0.5, 0.0, 0.5, 1.0, 1.5])

    def test_rejects_invalid_endpoints_and_sizes(self) -> None:
        with self.assertRaises(DomainError):
            Domain(0.0, 1.0, 5)
        with self.assertRaises(DomainError):
            Domain(1.0, math.inf, 5)
        with self.assertRaises(DomainError):
            Domain(2.0, 1.0, 5)
        with self.assertRaises(DomainError):
            Domain(1.0, 1.0, 2)

    def test_require_center_is_strict(self) -> None:
        dom = Domain(3.0, 3.0, 11)

        dom.require_center(2.9)
        with self.assertRaises(DomainError):
            dom.require_center(3.0)
        with self.assertRaises(DomainError):
            dom.require_center(math.nan)

    def test_profile_length_must_match_grid(self) -> None:
        dom = Domain(1.0, 1.0, 5)

        with self.assertRaises(ValidationError):
            Profile(dom, np.zeros(4))

        profile = Profile(dom, [-1, 0, 0, 0, 1])
        self.assertTrue(profile.is_dirichlet())
        self.assertEqual(profile.values.dtype, np.float64)
        self.assertFalse(profile.with_values(np.zeros(5)).is_dirichlet())


class WaveAndPotentialTests(unittest.TestCase):
    def test_wave_at_center(self) -> None:
        self.assertEqual(eval_wave(0.0, 0.0), (0.0, 1.0))

    def test_potential_values(self) -> None:
        self.assertEqual(eval_potential(1.0), (0.0, 0.0, 2.0))
        self.assertEqual(eval_potential(0.0), (0.25, 0.0, -1.0))
        self.assertEqual(eval_potential(2.0), (2.25, 6.0, 11.0))

    def test_slope_equals_one_minus_wave_squared(self) -> None:
        x = np.linspace(-30.0, 30.0, 2001)
        wave, slope = eval_wave(0.7, x)

        self.assertTrue(np.all(np.abs(wave) <= 1.0))
        np.testing.assert_allclose(slope, 1.0 - wave**2, rtol=0, atol=1e-15)

    def test_sech2_stays_positive_in_far_tails(self) -> None:
        self.assertGreater(float(sech2(300.0)), 0.0)
        self.assertEqual(float(sech2(1e6)), 0.0)

    def test_second_derivative_matches_finite_difference(self) -> None:
        x = np.linspace(-3.0, 3.0, 13)
        step = 1e-4
        _, ahead = eval_wave(0.2, x + step)
        _, behind = eval_wave(0.2, x - step)

        np.testing.assert_allclose(eval_wave_second(0.2, x), (ahead - behind) / (2 * step), atol=1e-7)

    def test_slope_energy_on_wide_domain(self) -> None:
        dom = Domain(6.0, 6.0, 1201)
        _, slope = eval_wave(0.0, dom.grid())

        self.assertAlmostEqual(inner(dom, slope, slope), 4.0 / 3.0, delta=1e-8)


class HFunctionTests(unittest.TestCase):
    def test_vanishes_at_center(self) -> None:
        self.assertEqual(eval_h(1.3, 1.3), 0.0)

    def test_matches_quadrature(self) -> None:
        expected, _ = quad(lambda y: 1.0 / float(sech2(y)) ** 2, 0.0, 1.0)

        self.assertAlmostEqual(eval_h(0.0, 1.0), expected, places=10)
        self.assertAlmostEqual(eval_h(0.0, 1.0), 2.135, places=3)

    def test_odd_about_center(self) -> None:
        self.assertAlmostEqual(eval_h(0.5, 1.5), -eval_h(0.5, -0.5), places=12)

    @settings(max_examples=60, deadline=None)
    @given(
        st.floats(min_value=-20.0, max_value=20.0),
        st.floats(min_value=-20.0, max_value=20.0),
        st.floats(min_value=1e-3, max_value=5.0),
    )
    def test_strictly_increasing(self, zeta: float, x: float, gap: float) -> None:
        self.assertGreater(eval_h(zeta, x + gap), eval_h(zeta, x))

    def test_log_difference_agrees_with_direct_difference(self) -> None:
        pairs = [(-2.0, -0.5), (-1.0, 2.0), (0.3, 4.0), (0.0, 1.0)]
        for lo, hi in pairs:
            with self.subTest(lo=lo, hi=hi):
                direct = eval_h(0.0, hi) - eval_h(0.0, lo)
                self.assertAlmostEqual(float(np.exp(log_h_difference(lo, hi))) / direct, 1.0, places=12)

    def test_log_difference_is_finite_beyond_overflow(self) -> None:
        value = float(log_h_difference(-400.0, 400.0))

        self.assertTrue(math.isfinite(value))
        self.assertAlmostEqual(value, 1600.0 - math.log(64.0) + math.log(2.0), places=8)
        self.assertEqual(eval_h(0.0, 400.0), math.inf)


class PhiTests(unittest.TestCase):
    def test_coefficients_on_symmetric_domain(self) -> None:
        c, d = phi_coefficients(0.0, Domain(3.0, 3.0, 61))

        self.assertAlmostEqual(c, 2.0 / (1.0 + math.tanh(3.0)), places=14)
        self.assertAlmostEqual(c, 1.00248, places=5)
        self.assertAlmostEqual(d, -0.50124, places=5)

    def test_q_runs_from_zero_to_one(self) -> None:
        dom = Domain(3.0, 4.0, 71)
        q = eval_q(0.4, dom, dom.grid())

        self.assertEqual(q[0], 0.0)
        self.assertAlmostEqual(q[-1], 1.0, places=14)
        self.assertTrue(np.all(np.diff(q) > 0))

    def test_boundary_values_are_exact(self) -> None:
        dom = Domain(2.0, 3.0, 51)
        zeta = 0.3
        phi = eval_phi(zeta, dom)

        self.assertAlmostEqual(phi.values[0], -1.0 - math.tanh(-2.0 - zeta), places=15)
        self.assertAlmostEqual(phi.values[-1], 1.0 - math.tanh(3.0 - zeta), places=15)

    def test_ode_residual_is_second_order(self) -> None:
        coarse = phi_residual(3.0, 301)
        fine = phi_residual(3.0, 601)

        self.assertAlmostEqual(coarse / fine, 4.0, delta=0.4)

    def test_center_outside_domain_raises(self) -> None:
        with self.assertRaises(DomainError):
            eval_phi(3.0, Domain(3.0, 3.0, 31))

    def test_wide_walls_do_not_overflow(self) -> None:
        phi = eval_phi(0.0, Domain(200.0, 200.0, 4001))

        self.assertTrue(np.all(np.isfinite(phi.values)))


class QuadratureTests(unittest.TestCase):
    def test_trapezoid_inner_product_of_constant(self) -> None:
        dom = Domain(1.0, 2.0, 31)

        self.assertAlmostEqual(inner(dom, np.ones(31), np.ones(31)), 3.0, places=14)
        self.assertAlmostEqual(norm2(dom, np.full(31, 2.0)), 2.0 * math.sqrt(3.0), places=14)

    def test_translation_mode_is_normalized(self) -> None:
        dom = Domain(4.0, 4.0, 401)

        self.assertAlmostEqual(norm2(dom, translation_mode(0.5, dom).values), 1.0, places=14)

    def test_pinned_wave_profile(self) -> None:
        dom = Domain(2.0, 2.0, 21)

        self.assertTrue(wave_profile(0.0, dom).is_dirichlet())
        self.assertFalse(wave_profile(0.0, dom, pinned=False).is_dirichlet())


if __name__ == '__main__':
    unittest.main()
