import math
from fractions import Fraction
from unittest import TestCase

import numpy as np

from algebra.polynomials import UniPoly
from algebra.roots import AlgNum, algebraic_roots
from dynamics.heights import (canonical_height, canonical_height_alg, local_canonical_height, weil_height)
from dynamics.maps import ProjPointP1, RationalMap, height_box_constant, homogeneous_step, orbit_detect
from errors import InvalidArgumentError


def poly_map(*coefficients):
    return RationalMap.polynomial(coefficients)


def naive_height_oracle(c: int, start: int, levels: int) -> float:
    """h(v_n)/2^n for v_{k+1} = v_k^2 + c over the integers."""
    v = start
    for _ in range(levels):
        v = v * v + c
    return math.log(abs(v)) / 2 ** levels


class TestWeilHeight(TestCase):

    def test_values(self):
        self.assertAlmostEqual(weil_height(Fraction(3, 2)), math.log(3))
        self.assertEqual(weil_height(0), 0.0)
        self.assertAlmostEqual(weil_height(-7), math.log(7))


class TestLocalCanonicalHeight(TestCase):

    def test_power_map_archimedean(self):
        self.assertAlmostEqual(local_canonical_height(poly_map(0, 0, 1), 2, "arch"), math.log(2), places=9)

    def test_good_prime_closed_form(self):
        self.assertAlmostEqual(local_canonical_height(poly_map(0, 0, 1), Fraction(1, 2), 2), math.log(2), places=12)

    def test_preperiodic_point_vanishes_everywhere(self):
        f = poly_map(-1, 0, 1)
        for place in ("arch", 2, 3):
            self.assertAlmostEqual(local_canonical_height(f, 0, place), 0.0, places=8)

    def test_tolerance_must_be_positive(self):
        with self.assertRaises(InvalidArgumentError):
            local_canonical_height(poly_map(0, 0, 1), 2, "arch", tol=0)


class TestCanonicalHeight(TestCase):

    def test_power_map_equals_weil_height(self):
        result = canonical_height(poly_map(0, 0, 1), Fraction(3, 2))
        self.assertAlmostEqual(result.value, math.log(3), places=9)
        self.assertEqual([place for place, _ in result.breakdown], ["arch", 2])

    def test_preperiodic_point(self):
        result = canonical_height(poly_map(-1, 0, 1), 0)
        self.assertLessEqual(abs(result.value), result.error_radius + 1e-12)

    def test_matches_naive_height_sequence(self):
        result = canonical_height(poly_map(2, 0, 1), 2)
        self.assertAlmostEqual(result.value, 0.9099, delta=1e-3)
        self.assertAlmostEqual(result.value, naive_height_oracle(2, 2, 20), delta=1e-7)

    def test_breakdown_sums_to_value(self):
        f = poly_map("1/3", 0, 1)
        result = canonical_height(f, Fraction(1, 3))
        self.assertAlmostEqual(result.value, math.fsum(v for _, v in result.breakdown), places=12)
        self.assertIn(3, [place for place, _ in result.breakdown])
        for place, local in result.breakdown:
            self.assertAlmostEqual(local_canonical_height(f, Fraction(1, 3), place), local, places=8)

    def test_functoriality_at_bad_prime(self):
        f = poly_map("1/3", 0, 1)
        x = Fraction(1, 3)
        here = canonical_height(f, x)
        there = canonical_height(f, f(x))
        self.assertLessEqual(abs(there.value - 2 * here.value), there.error_radius + 2 * here.error_radius + 1e-12)

    def test_functoriality_for_rational_map(self):
        f = RationalMap(UniPoly([1, 0, 1]), UniPoly([0, 2]))
        x = Fraction(3, 5)
        here = canonical_height(f, x)
        there = canonical_height(f, homogeneous_step(f, x))
        self.assertLessEqual(abs(there.value - 2 * here.value), there.error_radius + 2 * here.error_radius + 1e-12)

    def test_nonnegative_within_radius(self):
        f = RationalMap(UniPoly([-1, 0, 3]), UniPoly([2, 1]))
        for x in (Fraction(0), Fraction(1), Fraction(-2, 7), ProjPointP1.infinity()):
            result = canonical_height(f, x)
            self.assertGreaterEqual(result.value + result.error_radius, 0.0)

    def test_naive_height_is_close_to_canonical(self):
        f = poly_map(-1, 2, 1)
        bound = height_box_constant(f) / (f.degree - 1)
        for x in (Fraction(1, 2), Fraction(-3), Fraction(5, 4)):
            result = canonical_height(f, x)
            self.assertLessEqual(abs(result.value - weil_height(x)), bound + result.error_radius)

    def test_zero_height_agrees_with_orbit_detection(self):
        constants = [0, -1, -2, Fraction(-3, 4), Fraction(1, 4), 1, Fraction(-1, 2), 2, Fraction(-3, 2),
                     Fraction(1, 3)]
        points = [0, 1, -1, 2, -2, Fraction(1, 2), Fraction(-1, 2), Fraction(3, 2), Fraction(-3, 2),
                  Fraction(1, 3), Fraction(2, 3)]
        for degree in (2, 3):
            for c in constants:
                f = poly_map(*([c] + [0] * (degree - 1) + [1]))
                for x in points:
                    preperiodic = orbit_detect(f, x).is_preperiodic
                    result = canonical_height(f, x)
                    with self.subTest(degree=degree, c=c, x=x):
                        self.assertEqual(preperiodic, result.value <= result.error_radius)

    def test_zero_height_agrees_with_orbit_detection_for_random_rational_maps(self):
        rng = np.random.default_rng(2024)
        checked = 0
        while checked < 60:
            P = UniPoly([Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4))) for _ in range(3)])
            Q = UniPoly([Fraction(int(rng.integers(-3, 4)), int(rng.integers(1, 4)))
                         for _ in range(int(rng.integers(1, 4)))])
            if P.is_zero or Q.is_zero:
                continue
            try:
                f = RationalMap(P, Q)
            except InvalidArgumentError:
                continue
            x = Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 5)))
            preperiodic = orbit_detect(f, x).is_preperiodic
            result = canonical_height(f, x)
            with self.subTest(f=str(f), x=x):
                self.assertEqual(preperiodic, result.value <= result.error_radius)
            checked += 1


class TestAlgebraicHeight(TestCase):

    def test_sqrt2_under_squaring(self):
        alpha = algebraic_roots(UniPoly([-2, 0, 1]), claimed_irreducible=True)[1]
        result = canonical_height_alg(poly_map(0, 0, 1), alpha)
        self.assertAlmostEqual(result.value, 0.5 * math.log(2), places=6)
        self.assertFalse(result.certified)

    def test_golden_ratio_under_squaring(self):
        alpha = algebraic_roots(UniPoly([-1, -1, 1]), claimed_irreducible=True)[1]
        result = canonical_height_alg(poly_map(0, 0, 1), alpha)
        self.assertAlmostEqual(result.value, 0.5 * math.log((1 + math.sqrt(5)) / 2), places=6)

    def test_rational_input_matches_rational_path(self):
        f = poly_map(1, 0, 1)
        alg = canonical_height_alg(f, AlgNum.from_rational(Fraction(3, 2)))
        exact = canonical_height(f, Fraction(3, 2))
        self.assertLessEqual(abs(alg.value - exact.value), alg.error_radius + exact.error_radius)

    def test_preperiodic_algebraic_point(self):
        # x^2 - 2 fixes 2 and sends ±sqrt(2) to 0 -> -2 -> 2
        alpha = algebraic_roots(UniPoly([-2, 0, 1]), claimed_irreducible=True)[0]
        result = canonical_height_alg(poly_map(-2, 0, 1), alpha)
        self.assertLess(abs(result.value), 1e-3)
