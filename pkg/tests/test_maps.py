from fractions import Fraction
from unittest import TestCase

from algebra.polynomials import UniPoly
from dynamics.maps import (Preperiodic, ProjPointP1, RationalMap, Wandering, bad_places, height_box_constant,
                           homogeneous_step, orbit_detect)
from errors import InvalidArgumentError


def poly_map(*coefficients):
    return RationalMap.polynomial(coefficients)


class TestProjPointP1(TestCase):

    def test_normalization_is_canonical(self):
        self.assertEqual(ProjPointP1.of(4, 2), ProjPointP1(2, 1))
        self.assertEqual(ProjPointP1.of(-4, -6), ProjPointP1(2, 3))
        self.assertEqual(ProjPointP1.of(Fraction(1, 2), Fraction(1, 3)), ProjPointP1(3, 2))
        self.assertEqual(ProjPointP1.of(-5, 0), ProjPointP1.infinity())

    def test_scalar_multiples_share_a_representative(self):
        base = ProjPointP1.of(-3, 7)
        for scale in (Fraction(2), Fraction(-5, 3), Fraction(1, 11)):
            self.assertEqual(ProjPointP1.of(-3 * scale, 7 * scale), base)

    def test_zero_vector_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            ProjPointP1.of(0, 0)

    def test_non_canonical_constructor_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            ProjPointP1(2, 4)


class TestRationalMap(TestCase):

    def test_degree_one_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            poly_map(1, 1)

    def test_non_morphism_rejected(self):
        # x^2 / x shares the root 0
        with self.assertRaises(InvalidArgumentError):
            RationalMap(UniPoly([0, 0, 1]), UniPoly([0, 1]))

    def test_lift_is_primitive_integral(self):
        f = poly_map("1/3", 0, 1)
        self.assertEqual(f.lift, ((1, 0, 3), (3, 0, 0)))


class TestHomogeneousStep(TestCase):

    def test_square_map(self):
        self.assertEqual(homogeneous_step(poly_map(0, 0, 1), ProjPointP1.of(2)), ProjPointP1(4, 1))

    def test_infinity_is_fixed_by_polynomials(self):
        self.assertEqual(homogeneous_step(poly_map(1, 0, 1), ProjPointP1.infinity()), ProjPointP1.infinity())

    def test_pole_maps_to_infinity(self):
        f = RationalMap(UniPoly([1, 0, 1]), UniPoly([0, 1]))
        self.assertEqual(homogeneous_step(f, ProjPointP1.of(0)), ProjPointP1.infinity())

    def test_agrees_with_affine_evaluation(self):
        f = RationalMap(UniPoly([1, -2, 3]), UniPoly([2, 0, 1]))
        for x in (Fraction(0), Fraction(1, 2), Fraction(-7, 3), Fraction(5)):
            image = f(x)
            self.assertEqual(homogeneous_step(f, x), ProjPointP1.of(image))


class TestBadPlaces(TestCase):

    def test_monic_square_map_has_none(self):
        self.assertEqual(bad_places(poly_map(0, 0, 1)), set())

    def test_denominator_is_bad(self):
        self.assertEqual(bad_places(poly_map("1/3", 0, 1)), {3})

    def test_leading_coefficient_of_denominator(self):
        f = RationalMap(UniPoly([0, 0, 1]), UniPoly([-1, 2]))
        self.assertEqual(bad_places(f), {2})


class TestOrbitDetect(TestCase):

    def test_period_two(self):
        result = orbit_detect(poly_map(-1, 0, 1), 0)
        self.assertEqual(result.kind, Preperiodic(0, 2))
        self.assertEqual([str(p) for p in result.orbit_prefix], ["[0:1]", "[-1:1]"])

    def test_fixed_point(self):
        self.assertEqual(orbit_detect(poly_map(-2, 0, 1), 2).kind, Preperiodic(0, 1))

    def test_strictly_preperiodic(self):
        self.assertEqual(orbit_detect(poly_map(-2, 0, 1), -2).kind, Preperiodic(1, 1))

    def test_wandering_has_witness(self):
        result = orbit_detect(poly_map(0, 0, 1), 2)
        self.assertIsInstance(result.kind, Wandering)
        witness = result.orbit_prefix[result.kind.witness_index]
        self.assertGreater(witness.weil_height(), result.kind.height_bound)

    def test_power_map_preperiodic_points(self):
        candidates = [Fraction(n, m) for n in range(-4, 5) for m in range(1, 5)]
        for d in (2, 3):
            f = poly_map(*([0] * d + [1]))
            found = {x for x in candidates if orbit_detect(f, x).is_preperiodic}
            self.assertEqual(found, {-1, 0, 1})
            self.assertTrue(orbit_detect(f, ProjPointP1.infinity()).is_preperiodic)

    def test_height_box_constant_of_power_map_is_zero(self):
        self.assertEqual(height_box_constant(poly_map(0, 0, 1)), 0.0)

    def test_rational_map_orbit(self):
        # (x^2 + 1)/x sends 0 to infinity, which it fixes
        f = RationalMap(UniPoly([1, 0, 1]), UniPoly([0, 1]))
        self.assertEqual(orbit_detect(f, 0).kind, Preperiodic(1, 1))

    def test_json_shape(self):
        payload = orbit_detect(poly_map(-1, 0, 1), 0).to_json()
        self.assertEqual(payload["kind"], "preperiodic")
        self.assertEqual(payload["period"], 2)
