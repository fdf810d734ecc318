"""Correlation experiments: is c₂ preperiodic for the second family at the parameters where c₁ is?"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from algebra.polynomials import UniPoly
from algebra.roots import AlgNum, rational_roots
from dynamics.heights import conjugate_height
from dynamics.maps import Preperiodic, Wandering, orbit_detect
from errors import InvalidArgumentError, NumericFailureError, UnsupportedError
from family.iteration import IterPair, iterate_mod
from family.map_family import MapFamily, StartPoint
from family.parameters import ParamEntry, find_preperiodic_params
from utils.validators import Bounds

logger = logging.getLogger(__name__)

PREPERIODIC = "preperiodic"
WANDERING = "wandering"
UNDECIDED = "numeric_undecided"

# an estimate within this many error radii of 0 is not called either way
UNDECIDED_FACTOR = 10.0


@dataclass(frozen=True)
class NumericUndecided:
    estimate: float
    error_radius: float

    def to_json(self) -> Dict:
        return {"kind": UNDECIDED, "estimate": self.estimate, "error_radius": self.error_radius}


Status = Union[Preperiodic, Wandering, NumericUndecided]


def status_name(status: Status) -> str:
    if isinstance(status, Preperiodic):
        return PREPERIODIC
    if isinstance(status, Wandering):
        return WANDERING
    return UNDECIDED


@dataclass(frozen=True)
class ParamClassification:
    """One row of a correlation table."""

    lam: Union[Fraction, AlgNum]
    status_1: Status
    status_2: Status
    hhat_2_estimate: Optional[float] = None
    error_radius: Optional[float] = None

    @property
    def kind(self) -> str:
        return "rational" if isinstance(self.lam, Fraction) else "algebraic"

    @property
    def lambda_repr(self) -> str:
        return str(self.lam)

    @property
    def coincides(self) -> bool:
        return status_name(self.status_1) == status_name(self.status_2)

    def row(self) -> Dict:
        """Flat CSV row in the fixed column order."""
        return {
            "lambda_repr": self.lambda_repr,
            "kind": self.kind,
            "status_1": status_name(self.status_1),
            "status_2": status_name(self.status_2),
            "hhat_2_estimate": "" if self.hhat_2_estimate is None else repr(self.hhat_2_estimate),
            "error_radius": "" if self.error_radius is None else repr(self.error_radius),
        }


CORRELATION_COLUMNS = ["lambda_repr", "kind", "status_1", "status_2", "hhat_2_estimate", "error_radius"]


@dataclass
class CorrelationTable:
    rows: List[ParamClassification] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    @property
    def summary(self) -> Dict[str, int]:
        statuses = [status_name(r.status_2) for r in self.rows]
        return {
            "rows": len(self.rows),
            "coincide": sum(1 for r in self.rows if r.coincides),
            "separate": statuses.count(WANDERING),
            "undecided": statuses.count(UNDECIDED),
            "skipped": len(self.skipped),
        }

    def to_json(self) -> Dict:
        return {"summary": self.summary, "rows": [r.row() for r in self.rows], "skipped": self.skipped}


def _exact_relation_mod(fam: MapFamily, start: StartPoint, factor: UniPoly,
                        bounds: Bounds) -> Optional[Tuple[int, int]]:
    """Find m < n with A_n B_m ≡ A_m B_n modulo the defining polynomial of λ."""
    residues = iterate_mod(fam, start, factor, bounds.max_pre + bounds.max_per)
    for m in range(bounds.max_pre + 1):
        A_m, B_m = residues[m]
        for n in range(m + 1, m + bounds.max_per + 1):
            A_n, B_n = residues[n]
            if ((A_n * B_m - A_m * B_n) % factor).is_zero:
                return m, n - m
    return None


def _height_estimate(fam: MapFamily, start: StartPoint, factor: UniPoly,
                     bounds: Bounds) -> Tuple[float, float]:
    """Conjugate-averaged ĥ of c(λ) from h(f^n(c(λ)))/d^n at the deepest affordable level."""
    d = fam.d
    residues = iterate_mod(fam, start, factor, bounds.alg_levels)
    estimate, radius = math.nan, math.inf
    previous = None
    for n, (A, B) in enumerate(residues):
        h_n, r_n, bits = conjugate_height(factor, A, B, bounds.max_bits)
        if math.isnan(h_n):
            logger.warning("height estimate truncated at level %d (%d bits)", n, bits)
            break
        current = h_n / d ** n
        tail = abs(current - previous) / (d - 1) if previous is not None else math.inf
        estimate, radius = current, tail + r_n / d ** n
        previous = current
    return estimate, radius


def _classify_rational(fam: MapFamily, start: StartPoint, lam: Fraction) -> Status:
    return orbit_detect(fam.specialize(lam), start.value_at(lam)).kind


def _classify_algebraic(fam: MapFamily, start: StartPoint, factor: UniPoly,
                        bounds: Bounds) -> Tuple[Status, Optional[float], Optional[float]]:
    relation = _exact_relation_mod(fam, start, factor, bounds)
    if relation is not None:
        return Preperiodic(*relation), None, None
    try:
        estimate, radius = _height_estimate(fam, start, factor, bounds)
    except NumericFailureError as exc:
        logger.warning("height estimate failed for %s: %s", factor.to_json(), exc)
        return NumericUndecided(math.nan, math.inf), None, None
    if math.isnan(estimate) or estimate < UNDECIDED_FACTOR * radius:
        return NumericUndecided(estimate, radius), estimate, radius
    # witness index -1: decided by the height estimate, not by an orbit point
    return Wandering(-1, estimate - radius), estimate, radius


def correlation_experiment(fam1: MapFamily, c1: StartPoint, fam2: MapFamily, c2: StartPoint,
                           bounds: Optional[Bounds] = None,
                           params: Optional[List[ParamEntry]] = None) -> CorrelationTable:
    """Classify (fam2, c2) at every parameter where c1 is preperiodic for fam1.

    Rational λ are decided exactly with orbit_detect. For an algebraic λ the
    relation A_nB_m = A_mB_n of the second family is first tested modulo the
    minimal polynomial of λ; failing that, the conjugate-averaged canonical
    height is estimated and a value within 10 radii of 0 is left undecided.

    Args:
        fam1: First family
        c1: Its start point
        fam2: Second family
        c2: Its start point
        bounds: Search depth and numeric budgets
        params: Parameters already found for (fam1, c1)

    Returns:
        The table of classifications
    """
    bounds = bounds or Bounds()
    if params is None:
        params = find_preperiodic_params(fam1, c1, bounds.max_pre, bounds.max_per,
                                         IterPair(fam1, c1, bounds.max_degree, bounds.max_bits))
    table = CorrelationTable()
    cache: Dict[UniPoly, Tuple[Status, Optional[float], Optional[float]]] = {}
    for entry in params:
        if entry.value is None:
            table.skipped.append(f"{entry.lambda_repr()}: {entry.error}")
            continue
        if entry.is_rational:
            lam = entry.value
            try:
                status_1 = _classify_rational(fam1, c1, lam)
                status_2 = _classify_rational(fam2, c2, lam)
            except InvalidArgumentError as exc:
                table.skipped.append(f"{lam}: {exc}")
                continue
            table.rows.append(ParamClassification(lam, status_1, status_2))
            continue
        relation = entry.relation
        status_1 = Preperiodic(relation[0], relation[1] - relation[0])
        if entry.factor not in cache:
            cache[entry.factor] = _classify_algebraic(fam2, c2, entry.factor, bounds)
        status_2, estimate, radius = cache[entry.factor]
        table.rows.append(ParamClassification(entry.value, status_1, status_2, estimate, radius))
    logger.info("correlation: %s", table.summary)
    return table


@dataclass
class PcfReport:
    """Correlation tables for each pair of critical points, plus what could not be run."""

    tables: List[Tuple[Fraction, Fraction, CorrelationTable]] = field(default_factory=list)
    unsupported: List[str] = field(default_factory=list)

    def to_json(self) -> Dict:
        return {
            "pairs": [{"critical_f": str(cf), "critical_g": str(cg), **table.to_json()}
                      for cf, cg, table in self.tables],
            "unsupported": self.unsupported,
        }


def _critical_points(name: str, poly: UniPoly, report: PcfReport) -> List[Fraction]:
    if poly.degree < 2:
        raise InvalidArgumentError(f"{name} must have degree >= 2")
    derivative = poly.derivative()
    roots = rational_roots(derivative)
    if len(roots) < derivative.degree:
        report.unsupported.append(f"{name} = {poly.to_json()} has irrational critical points")
        return []
    return sorted(set(roots))


def translation_family(poly: UniPoly, shift: UniPoly) -> MapFamily:
    """The family z -> poly(z) + shift(t) over the parameter t."""
    coeffs = [UniPoly.constant(c) for c in poly.coefficients]
    coeffs[0] = coeffs[0] + shift
    return MapFamily(coeffs, [UniPoly.constant(1)])


def pcf_experiment(f: UniPoly, g: UniPoly, x_of_t: UniPoly, y_of_t: UniPoly,
                   bounds: Optional[Bounds] = None) -> PcfReport:
    """Correlate critical orbits of f(z) + x(t) and g(z) + y(t) over the parameter t.

    Only rational critical points are supported; irrational ones are listed in
    the report instead.
    """
    bounds = bounds or Bounds()
    report = PcfReport()
    crit_f = _critical_points("f", f, report)
    crit_g = _critical_points("g", g, report)
    fam_f = translation_family(f, x_of_t)
    fam_g = translation_family(g, y_of_t)
    for cf in crit_f:
        c1 = StartPoint.of(cf)
        params = find_preperiodic_params(fam_f, c1, bounds.max_pre, bounds.max_per,
                                         IterPair(fam_f, c1, bounds.max_degree, bounds.max_bits))
        for cg in crit_g:
            table = correlation_experiment(fam_f, c1, fam_g, StartPoint.of(cg), bounds, params)
            report.tables.append((cf, cg, table))
    if not report.tables and not report.unsupported:
        raise UnsupportedError("no critical point pairs to correlate")
    return report
