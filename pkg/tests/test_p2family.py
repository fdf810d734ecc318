import math
from fractions import Fraction
from unittest import TestCase

from algebra.polynomials import BiPoly
from algebra.rationals import ARCH
from errors import InvalidArgumentError
from p2family.counterexample import SHARED_ORBIT_FAMILY, p2_counterexample_check
from p2family.p2_heights import (GrowthConstants, growth_constants, outer_radius, p2_canonical_height,
                                 p2_orbit_detect, p2_parameter_height, p2_ratio_report)
from p2family.p2_iteration import P2IterPair, p2_iterate_symbolic, p2_theta_check
from p2family.p2_map import P2Family, ProjPointP2, p2_step


class TestProjPointP2(TestCase):

    def test_canonical_form(self):
        self.assertEqual(ProjPointP2.of(2, 4, -2), ProjPointP2(-1, -2, 1))
        self.assertEqual(ProjPointP2.of(Fraction(1, 2), Fraction(1, 3), 0), ProjPointP2(3, 2, 0))
        self.assertEqual(ProjPointP2.of(-5, 0, 0), ProjPointP2(1, 0, 0))

    def test_rejects_origin_and_unreduced(self):
        with self.assertRaises(InvalidArgumentError):
            ProjPointP2.of(0, 0, 0)
        with self.assertRaises(InvalidArgumentError):
            ProjPointP2(2, 4, 2)


class TestP2Family(TestCase):

    def test_rejects_low_degree(self):
        with self.assertRaises(InvalidArgumentError):
            P2Family([0, 0, 1], [0, 0, 1])

    def test_rejects_vanishing_top_coefficient(self):
        with self.assertRaises(InvalidArgumentError):
            P2Family([1, 0, 0, 0], [0, 0, 0, 1])


class TestP2Step(TestCase):

    def test_fixed_point(self):
        self.assertEqual(p2_step(SHARED_ORBIT_FAMILY, ProjPointP2(0, 1, 1), 0, 0), ProjPointP2(0, 1, 1))

    def test_lands_on_the_fixed_point(self):
        self.assertEqual(p2_step(SHARED_ORBIT_FAMILY, ProjPointP2(1, 2, 1), 0, -7), ProjPointP2(0, 1, 1))

    def test_line_at_infinity_goes_to_top_coefficients(self):
        fam = P2Family([1, 2, 0, 3], [0, 1, 0, -5])
        self.assertEqual(p2_step(fam, ProjPointP2(1, 1, 0), 4, 9), ProjPointP2.of(3, -5, 0))


class TestP2Iteration(TestCase):

    def test_first_levels(self):
        pair = p2_iterate_symbolic(SHARED_ORBIT_FAMILY, 1, 2, 2)
        self.assertEqual(pair.level(0), (BiPoly.constant(1), BiPoly.constant(2)))
        A1, B1 = pair.level(1)
        self.assertEqual(A1, BiPoly({(1, 0): 2}))
        self.assertEqual(B1, BiPoly({(0, 0): 8, (0, 1): 1}))
        self.assertEqual(pair.level(2)[0].total_degree, 3)

    def test_degrees_grow_like_powers_of_d(self):
        pair = p2_iterate_symbolic(SHARED_ORBIT_FAMILY, 1, 2, 4)
        for n in range(1, 5):
            A, B = pair.level(n)
            self.assertEqual((A.total_degree, B.total_degree), (3 ** (n - 1), 3 ** (n - 1)))

    def test_zero_start_coordinate_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            P2IterPair(SHARED_ORBIT_FAMILY, 0, 1)

    def test_specialization_matches_exact_orbit(self):
        fam = P2Family([1, 0, 2, 1], [0, -1, 0, 2])
        pair = p2_iterate_symbolic(fam, 1, 2, 3)
        lam, mu = Fraction(1, 2), Fraction(-3)
        point = ProjPointP2(1, 2, 1)
        for n in range(1, 4):
            point = p2_step(fam, point, lam, mu)
            A, B = pair.evaluate(n, lam, mu)
            self.assertEqual(point, ProjPointP2.of(A, B, 1))


class TestThetaCheck(TestCase):

    def test_shared_orbit_family(self):
        report = p2_theta_check(P2IterPair(SHARED_ORBIT_FAMILY, 1, 2), 3)
        self.assertTrue(report.passed)
        self.assertEqual(report.levels[0]["A_constant"], "2")
        self.assertEqual(report.levels[0]["B_constant"], "1")

    def test_leading_coefficient_enters_from_level_two(self):
        fam = P2Family([0, 0, 0, 2], [1, 0, 0, 1])
        report = p2_theta_check(P2IterPair(fam, 1, 1), 2)
        self.assertEqual([level["A_constant"] for level in report.levels], ["1", "2"])


class TestP2Heights(TestCase):

    def test_preperiodic_points_have_height_zero(self):
        for lam, mu, pt in ((0, -7, (1, 2, 1)), (0, 0, (0, 1, 1))):
            result = p2_canonical_height(SHARED_ORBIT_FAMILY, lam, mu, pt, tol=1e-9)
            self.assertAlmostEqual(result.value, 0.0, delta=1e-8)

    def test_wandering_point(self):
        result = p2_canonical_height(SHARED_ORBIT_FAMILY, 0, 0, (1, 2, 1), tol=1e-9)
        self.assertAlmostEqual(result.value, math.log(2), delta=1e-8)
        self.assertGreater(result.value, 10 * 1e-9)

    def test_functoriality_with_bad_primes(self):
        fam = P2Family([1, 0, 0, 1], [0, 1, 0, 2])
        lam, mu = Fraction(1, 2), Fraction(-1)
        pt = ProjPointP2(1, 1, 1)
        image = p2_step(fam, pt, lam, mu)
        h = p2_canonical_height(fam, lam, mu, pt, tol=1e-9)
        h_image = p2_canonical_height(fam, lam, mu, image, tol=1e-9)
        self.assertIn(2, [place for place, _ in h.breakdown])
        self.assertAlmostEqual(h_image.value, 3 * h.value, delta=1e-7)

    def test_parameter_height_scales_by_d(self):
        value = p2_parameter_height(SHARED_ORBIT_FAMILY, 0, 0, 1, 2)
        self.assertAlmostEqual(value, 3 * math.log(2), delta=1e-8)


class TestP2OrbitDetect(TestCase):

    def test_fixed_landing_and_wandering_points(self):
        fixed = p2_orbit_detect(SHARED_ORBIT_FAMILY, 0, 0, (0, 1, 1))
        self.assertEqual((fixed.kind.preperiod, fixed.kind.period), (0, 1))
        self.assertTrue(p2_orbit_detect(SHARED_ORBIT_FAMILY, 0, -7, (1, 2, 1)).is_preperiodic)
        self.assertFalse(p2_orbit_detect(SHARED_ORBIT_FAMILY, 0, 0, (1, 2, 1)).is_preperiodic)


class TestCounterexample(TestCase):

    def test_zeta_one(self):
        report = p2_counterexample_check(1)
        self.assertTrue(report.passed)
        self.assertEqual(report.c2_cycle, (1, 1))
        self.assertEqual(len(report.rational_checks), 2)

    def test_cube_roots(self):
        report = p2_counterexample_check(3)
        self.assertEqual(report.y_exponents, [1, 0, 0, 0, 0, 0])
        self.assertEqual(report.c2_cycle, (2, 1))

    def test_fourth_roots(self):
        report = p2_counterexample_check(4)
        self.assertEqual(report.y_exponents, [1, 3, 1, 3, 1, 3])
        self.assertEqual(report.c2_cycle, (1, 2))

    def test_holds_up_to_twelve(self):
        for k in range(1, 13):
            self.assertTrue(p2_counterexample_check(k).passed, k)

    def test_k_must_be_positive(self):
        with self.assertRaises(InvalidArgumentError):
            p2_counterexample_check(0)


MIXED_FAMILY = P2Family([1, 2, -3, 2], [0, 5, 0, 1])


class TestGrowthConstants(TestCase):

    def test_fitted_delta_beats_half_the_leading_coefficient(self):
        for fam in (SHARED_ORBIT_FAMILY, MIXED_FAMILY):
            growth = growth_constants(fam, ARCH)
            self.assertGreaterEqual(growth.delta, min(abs(fam.c_P), abs(fam.c_Q)) / 2)
        self.assertAlmostEqual(growth_constants(SHARED_ORBIT_FAMILY, ARCH).delta, 0.75)

    def test_candidates_skip_radii_without_a_positive_delta(self):
        growth = growth_constants(MIXED_FAMILY, ARCH)
        self.assertEqual([r for r, _ in growth.candidates], [2.5, 6.0, 10.0])
        self.assertEqual(growth.L6, 10.0)
        self.assertAlmostEqual(growth.delta, 0.95)

    def test_delta_bounds_both_forms_on_the_circle(self):
        growth = growth_constants(MIXED_FAMILY, ARCH)
        d = MIXED_FAMILY.d
        for k in range(24):
            z = growth.L6 * complex(math.cos(2 * math.pi * k / 24), math.sin(2 * math.pi * k / 24))
            floor = growth.delta * abs(z) ** d * (1 - 1e-9)
            self.assertGreaterEqual(abs(MIXED_FAMILY.P_affine(z)), floor)
            self.assertGreaterEqual(abs(MIXED_FAMILY.Q_affine(z)), floor)

    def test_start_picks_the_smallest_outer_radius(self):
        chosen = growth_constants(MIXED_FAMILY, ARCH, 1, 2)
        self.assertIn((chosen.L6, chosen.delta), chosen.candidates)
        for r, delta in chosen.candidates:
            other = GrowthConstants(delta, r, chosen.C15, chosen.candidates)
            self.assertLessEqual(outer_radius(MIXED_FAMILY, Fraction(1), Fraction(2), ARCH, chosen),
                                 outer_radius(MIXED_FAMILY, Fraction(1), Fraction(2), ARCH, other))


class TestP2RatioReport(TestCase):

    def test_archimedean_bounds_hold(self):
        report = p2_ratio_report(SHARED_ORBIT_FAMILY, 1, 2, ARCH, L=2.0, sample_size=8, n_max=4)
        self.assertTrue(report.passed, report.violations)
        self.assertAlmostEqual(report.L_star, 16.0)
        self.assertEqual(len(report.inside), 3)
        for _, lo, hi in report.inside + report.outside:
            self.assertLessEqual(lo, hi)

    def test_outside_ratios_stay_above_half_delta(self):
        report = p2_ratio_report(SHARED_ORBIT_FAMILY, 1, 2, ARCH, L=2.0, sample_size=8, n_max=4, seed=5)
        delta = growth_constants(SHARED_ORBIT_FAMILY, ARCH).delta
        self.assertTrue(all(lo >= delta / 2 * (1 - 1e-9) for _, lo, _ in report.outside))

    def test_prime_place(self):
        report = p2_ratio_report(SHARED_ORBIT_FAMILY, 1, 2, 3, L=2.0, sample_size=6, n_max=3)
        self.assertTrue(report.passed, report.violations)
