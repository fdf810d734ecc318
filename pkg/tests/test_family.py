from fractions import Fraction
from unittest import TestCase

from algebra.polynomials import UniPoly
from dynamics.maps import ProjPointP1, Wandering, homogeneous_step, orbit_detect
from errors import DegreeStagnationError, HypothesisNotMetError, InvalidArgumentError, ResourceLimitError
from family.experiments import (PREPERIODIC, WANDERING, correlation_experiment, pcf_experiment, status_name,
                                translation_family)
from family.iteration import IterPair, check_degree_law, iterate_mod, iterate_symbolic, normalize_start
from family.map_family import (CONSTANT_LEADING, CONSTANT_RESULTANT, DEGREE_GAP, MapFamily, StartPoint,
                               validate_family)
from family.parameters import find_preperiodic_params, preperiodic_parameter_poly
from utils.validators import Bounds

LAM = UniPoly([0, 1])


def quadratic_family():
    """x² + λ."""
    return MapFamily([LAM, 0, 1])


def cubic_family():
    return MapFamily([LAM, 0, 0, 1])


class TestMapFamily(TestCase):

    def test_derived_degrees(self):
        fam = MapFamily([LAM, 0, 1], [UniPoly([2])])
        self.assertEqual((fam.d_P, fam.d_Q, fam.d, fam.s), (2, 0, 2, 2))
        self.assertEqual(fam.m1, Fraction(1, 2))
        self.assertEqual(fam.m2, 0)
        self.assertEqual(fam.m, Fraction(1, 2))

    def test_m_takes_the_steepest_coefficient(self):
        # x^3 + λ^2 x + λ: deg c_2 / 2 = 1 beats deg c_3 / 3 = 1/3
        fam = MapFamily([LAM, LAM * LAM, 0, 1])
        self.assertEqual(fam.m, 1)

    def test_from_json(self):
        fam = MapFamily.from_json({"P": [[0, 1], [], [1]], "Q": [[1]]})
        self.assertEqual(fam, quadratic_family())

    def test_specialize(self):
        f = quadratic_family().specialize(-2)
        self.assertEqual(f(Fraction(0)), -2)

    def test_start_point_rejects_common_factor(self):
        with self.assertRaises(InvalidArgumentError):
            StartPoint(LAM * LAM, LAM)

    def test_start_point_degrees(self):
        start = StartPoint.of([0, 0, 1], [1, 1])
        self.assertEqual((start.d_a, start.d_b, start.d_c), (2, 1, 1))
        self.assertIsNone(StartPoint.of(0).d_c)
        self.assertEqual(start.value_at(-1), ProjPointP1.infinity())


class TestValidateFamily(TestCase):

    def test_quadratic_passes(self):
        report = validate_family(quadratic_family())
        self.assertTrue(report.passed)
        self.assertEqual([c.name for c in report.checks], [CONSTANT_LEADING, CONSTANT_RESULTANT, DEGREE_GAP])

    def test_degree_gap_fails(self):
        report = validate_family(MapFamily([LAM, 0, 1], [0, 1]))
        self.assertIn(DEGREE_GAP, [c.name for c in report.failures])

    def test_nonconstant_leading_coefficient_fails(self):
        report = validate_family(MapFamily([1, 0, LAM]))
        self.assertEqual([c.name for c in report.failures], [CONSTANT_LEADING])

    def test_resultant_witness(self):
        # (x^2 + λ) / (x + λ) also has a λ-dependent resultant λ^2 + λ
        report = validate_family(MapFamily([LAM, 0, 1, 0], [LAM, 1]))
        failing = {c.name: c for c in report.failures}
        self.assertIn(CONSTANT_RESULTANT, failing)
        self.assertGreater(failing[CONSTANT_RESULTANT].witness.degree, 0)


class TestIteration(TestCase):

    def test_gleason_levels(self):
        pair = iterate_symbolic(quadratic_family(), StartPoint.of(0), 3)
        self.assertEqual(pair.level(1), (LAM, UniPoly([1])))
        self.assertEqual(pair.level(2)[0], UniPoly([0, 1, 1]))
        self.assertEqual(pair.level(3)[0], UniPoly([0, 1, 1, 2, 1]))

    def test_level_zero_is_start(self):
        start = StartPoint.of([1, 1], [0, 2])
        self.assertEqual(iterate_symbolic(quadratic_family(), start, 0).level(0), (start.a, start.b))

    def test_moving_start(self):
        A1, B1 = IterPair(quadratic_family(), StartPoint.of(LAM)).level(1)
        self.assertEqual(A1, UniPoly([0, 1, 1]))
        self.assertEqual(B1, UniPoly([1]))

    def test_specialization_consistency(self):
        fam = MapFamily([LAM, 1, 0, 1], [1, UniPoly([0, 2])])
        start = StartPoint.of([1, 1], [2])
        pair = iterate_symbolic(fam, start, 3)
        for lam in (Fraction(0), Fraction(1, 2), Fraction(-3)):
            f = fam.specialize(lam)
            point = start.value_at(lam)
            for n in range(4):
                A, B = pair.level(n)
                self.assertEqual(ProjPointP1.of(A(lam), B(lam)), point)
                point = homogeneous_step(f, point)

    def test_degree_cap(self):
        pair = IterPair(quadratic_family(), StartPoint.of(LAM), max_degree=10)
        with self.assertRaises(ResourceLimitError) as ctx:
            pair.extend_to(6)
        self.assertEqual(len(ctx.exception.partial), 4)

    def test_iterate_mod_matches_reduction(self):
        modulus = UniPoly([1, 0, 1])
        fam, start = quadratic_family(), StartPoint.of(0)
        pair = iterate_symbolic(fam, start, 4)
        for (A, B), (a, b) in zip(pair.levels, iterate_mod(fam, start, modulus, 4)):
            self.assertEqual(A % modulus, a)
            self.assertEqual(B % modulus, b)


class TestDegreeLaw(TestCase):

    def test_quadratic_moving_start(self):
        fam, start = quadratic_family(), StartPoint.of(LAM)
        report = check_degree_law(fam, start, 4)
        self.assertTrue(report.passed)
        pair = iterate_symbolic(fam, start, 3)
        self.assertEqual([A.degree for A, _ in pair.levels], [1, 2, 4, 8])
        self.assertTrue(all(A.lead == 1 for A, _ in pair.levels))

    def test_cubic(self):
        fam = cubic_family()
        self.assertEqual(fam.m, Fraction(1, 3))
        self.assertTrue(check_degree_law(fam, StartPoint.of(LAM), 3).passed)

    def test_rational_family(self):
        # (2x^3 + λx^2 + λx + 1) / (x + 1), Res = -1; c = λ^2 has deg 2 > m = 1
        fam = MapFamily([1, LAM, LAM, 2], [1, 1])
        self.assertTrue(validate_family(fam).passed)
        start = StartPoint.of(LAM * LAM)
        report = check_degree_law(fam, start, 3)
        self.assertTrue(report.passed, report.violations)

    def test_hypothesis_not_met(self):
        with self.assertRaises(HypothesisNotMetError):
            check_degree_law(quadratic_family(), StartPoint.of(0))


class TestNormalizeStart(TestCase):

    def test_zero_start_moves_once(self):
        k, start = normalize_start(quadratic_family(), StartPoint.of(0))
        self.assertEqual(k, 1)
        self.assertEqual(start, StartPoint.of(LAM))

    def test_already_normalized(self):
        self.assertEqual(normalize_start(quadratic_family(), StartPoint.of(LAM))[0], 0)

    def test_constant_family_stagnates(self):
        with self.assertRaises(DegreeStagnationError):
            normalize_start(MapFamily([0, 0, 1]), StartPoint.of(0), cap=4)


class TestParameters(TestCase):

    def setUp(self):
        self.pair = IterPair(quadratic_family(), StartPoint.of(0))

    def test_parameter_polynomials(self):
        self.assertEqual(preperiodic_parameter_poly(self.pair, 0, 1), LAM)
        self.assertEqual(preperiodic_parameter_poly(self.pair, 0, 2), UniPoly([0, 1, 1]))
        self.assertEqual(preperiodic_parameter_poly(self.pair, 2, 3), UniPoly([0, 0, 0, 2, 1]))

    def test_bad_levels_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            preperiodic_parameter_poly(self.pair, 2, 2)

    def test_gleason_rationals(self):
        entries = find_preperiodic_params(quadratic_family(), StartPoint.of(0), 2, 2, self.pair)
        rationals = [e.value for e in entries if e.is_rational]
        self.assertEqual(rationals, [-2, -1, 0])
        self.assertTrue(all(e.verified for e in entries if e.is_rational))
        factors = {e.factor for e in entries if not e.is_rational}
        self.assertIn(UniPoly([1, 0, 1]), factors)

    def test_rationals_match_orbit_oracle(self):
        fam, start = quadratic_family(), StartPoint.of(1)
        entries = find_preperiodic_params(fam, start, 1, 2)
        for entry in entries:
            if entry.is_rational:
                self.assertTrue(orbit_detect(fam.specialize(entry.value), 1).is_preperiodic)
        self.assertIn(-1, [e.value for e in entries if e.is_rational])

    def test_constant_family_has_none(self):
        self.assertEqual(find_preperiodic_params(MapFamily([0, 0, 1]), StartPoint.of(2), 2, 2), [])

    def test_algebraic_entries_isolate_i(self):
        entries = find_preperiodic_params(quadratic_family(), StartPoint.of(0), 2, 2, self.pair)
        disks = [e.value.isolating_disk for e in entries if e.factor == UniPoly([1, 0, 1])]
        self.assertEqual(len(disks), 2)
        self.assertEqual(sorted(round(d.imaginary) for d in disks), [-1, 1])


class TestCorrelation(TestCase):

    def test_identical_data_coincides(self):
        fam = quadratic_family()
        table = correlation_experiment(fam, StartPoint.of(0), fam, StartPoint.of(0), Bounds(max_pre=1, max_per=2))
        self.assertEqual(table.summary["rows"], 2)
        self.assertEqual(table.summary["coincide"], 2)

    def test_wandering_second_point(self):
        fam = quadratic_family()
        table = correlation_experiment(fam, StartPoint.of(0), fam, StartPoint.of(2), Bounds(max_pre=1, max_per=2))
        by_lambda = {row.lam: row for row in table.rows}
        self.assertIsInstance(by_lambda[Fraction(-1)].status_2, Wandering)
        self.assertEqual(table.summary["separate"], 2)

    def test_algebraic_parameters_decided_exactly(self):
        fam = quadratic_family()
        table = correlation_experiment(fam, StartPoint.of(0), fam, StartPoint.of(0), Bounds(max_pre=2, max_per=2))
        algebraic = [row for row in table.rows if row.kind == "algebraic"]
        self.assertTrue(algebraic)
        for row in algebraic:
            self.assertEqual(status_name(row.status_2), PREPERIODIC)
        self.assertEqual(table.summary["undecided"], 0)

    def test_algebraic_wandering_by_height(self):
        fam = quadratic_family()
        table = correlation_experiment(fam, StartPoint.of(0), fam, StartPoint.of(1), Bounds(max_pre=2, max_per=2))
        rows = [row for row in table.rows if row.kind == "algebraic" and row.lam.defining_poly == UniPoly([1, 0, 1])]
        self.assertEqual(len(rows), 2)
        for row in rows:
            self.assertEqual(status_name(row.status_2), WANDERING)
            self.assertGreater(row.hhat_2_estimate, 10 * row.error_radius)

    def test_csv_row_columns(self):
        fam = quadratic_family()
        table = correlation_experiment(fam, StartPoint.of(0), fam, StartPoint.of(0), Bounds(max_pre=0, max_per=1))
        self.assertEqual(list(table.rows[0].row()), ["lambda_repr", "kind", "status_1", "status_2",
                                                     "hhat_2_estimate", "error_radius"])


class TestPcf(TestCase):

    def test_translation_family(self):
        self.assertEqual(translation_family(UniPoly([0, 0, 1]), LAM), quadratic_family())

    def test_square_maps_on_the_diagonal(self):
        report = pcf_experiment(UniPoly([0, 0, 1]), UniPoly([0, 0, 1]), LAM, LAM, Bounds(max_pre=2, max_per=2))
        self.assertEqual(len(report.tables), 1)
        _, _, table = report.tables[0]
        rationals = sorted(row.lam for row in table.rows if row.kind == "rational")
        self.assertEqual(rationals, [-2, -1, 0])
        self.assertTrue(all(row.coincides for row in table.rows))

    def test_both_critical_points_of_cubic(self):
        report = pcf_experiment(UniPoly([0, -3, 0, 1]), UniPoly([0, 0, 1]), LAM, LAM, Bounds(max_pre=1, max_per=1))
        self.assertEqual(sorted(cf for cf, _, _ in report.tables), [-1, 1])

    def test_irrational_critical_points_listed(self):
        # z^3 - 2z has critical points ±sqrt(2/3)
        report = pcf_experiment(UniPoly([0, -2, 0, 1]), UniPoly([0, 0, 1]), LAM, LAM, Bounds(max_pre=1, max_per=1))
        self.assertEqual(len(report.unsupported), 1)
        self.assertEqual(report.tables, [])
