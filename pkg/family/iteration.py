"""Symbolic iteration of a moving start point under a family, and the degree law."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from algebra.polynomials import UniPoly
from algebra.resultants import poly_gcd
from dynamics.heights import DEFAULT_MAX_BITS
from errors import DegreeStagnationError, HypothesisNotMetError, InvalidArgumentError, ResourceLimitError
from family.map_family import MapFamily, StartPoint

logger = logging.getLogger(__name__)

DEFAULT_MAX_DEGREE = 5000


class IterPair:
    """Cached levels (A_n, B_n) of the recursion

        A_{n+1} = P(A_n, B_n),   B_{n+1} = Q(A_n, B_n),

    with P and Q homogenized to degree d_P (so B picks up the factor B_n^s).
    Levels only ever grow, so a cap hit leaves the computed prefix intact.
    """

    def __init__(self, fam: MapFamily, start: StartPoint, max_degree: int = DEFAULT_MAX_DEGREE,
                 max_bits: int = DEFAULT_MAX_BITS):
        """Initialize the cache at level 0.

        Args:
            fam: Family of maps
            start: Start point c = a/b
            max_degree: Largest λ-degree allowed for A_n or B_n
            max_bits: Largest total coefficient size (bits) allowed per level
        """
        self.fam = fam
        self.start = start
        self.max_degree = max_degree
        self.max_bits = max_bits
        self._levels: List[Tuple[UniPoly, UniPoly]] = [(start.a, start.b)]

    @property
    def cached(self) -> int:
        """Highest level computed so far."""
        return len(self._levels) - 1

    @property
    def levels(self) -> List[Tuple[UniPoly, UniPoly]]:
        return list(self._levels)

    def extend_to(self, n: int) -> None:
        if n < 0:
            raise InvalidArgumentError("level must be nonnegative")
        P_form, Q_form = self.fam.forms
        while self.cached < n:
            A, B = self._levels[-1]
            nxt_A, nxt_B = P_form.evaluate(A, B), Q_form.evaluate(A, B)
            degree = max(nxt_A.degree, nxt_B.degree)
            bits = nxt_A.total_coefficient_bits() + nxt_B.total_coefficient_bits()
            if degree > self.max_degree or bits > self.max_bits:
                raise ResourceLimitError(
                    f"level {self.cached + 1} has degree {degree} and {bits} coefficient bits "
                    f"(caps {self.max_degree}, {self.max_bits})", list(self._levels))
            self._levels.append((nxt_A, nxt_B))
            logger.debug("level %d: deg A = %d, deg B = %d", self.cached, nxt_A.degree, nxt_B.degree)

    def level(self, n: int) -> Tuple[UniPoly, UniPoly]:
        """(A_n, B_n), extending the cache when needed."""
        self.extend_to(n)
        return self._levels[n]

    def degrees(self) -> List[Tuple[int, int]]:
        return [(A.degree, B.degree) for A, B in self._levels]

    def to_json(self) -> Dict:
        return {"levels": [{"n": n, "A": A.to_json(), "B": B.to_json()} for n, (A, B) in enumerate(self._levels)]}


def iterate_symbolic(fam: MapFamily, start: StartPoint, n: int, max_degree: int = DEFAULT_MAX_DEGREE,
                     max_bits: int = DEFAULT_MAX_BITS) -> IterPair:
    """Iterate the start point symbolically up to level n.

    Args:
        fam: Family of maps
        start: Start point
        n: Target level
        max_degree: Degree cap
        max_bits: Coefficient size cap

    Returns:
        An IterPair with levels 0..n cached
    """
    pair = IterPair(fam, start, max_degree, max_bits)
    pair.extend_to(n)
    return pair


def iterate_mod(fam: MapFamily, start: StartPoint, modulus: UniPoly, n: int) -> List[Tuple[UniPoly, UniPoly]]:
    """Residues of (A_k, B_k) modulo a polynomial in λ for k = 0..n.

    Reduces at every step, so degrees stay below deg(modulus).
    """
    if modulus.degree < 1:
        raise InvalidArgumentError("modulus must have positive degree")
    P_form, Q_form = fam.forms
    out = [(start.a % modulus, start.b % modulus)]
    for _ in range(n):
        A, B = out[-1]
        out.append((P_form.evaluate(A, B) % modulus, Q_form.evaluate(A, B) % modulus))
    return out


@dataclass
class DegreeLawReport:
    """Outcome of checking the degree, leading-coefficient and coprimality laws level by level."""

    levels_checked: int
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> Dict:
        return {"levels_checked": self.levels_checked, "passed": self.passed, "violations": self.violations}


def check_degree_law(fam: MapFamily, start: StartPoint, n: int = 6, pair: Optional[IterPair] = None) -> DegreeLawReport:
    """Verify, for every level up to n,

        deg A_k = d_a d^k,   deg B_k = d_a d^k - d_c s^k,
        lead A_k = c_{P,0}^((d^k - 1)/(d - 1)) c_a^(d^k),   gcd(A_k, B_k) = 1.

    Args:
        fam: Family of maps
        start: Start point with deg c > m
        n: Deepest level to check
        pair: Existing cache to reuse

    Returns:
        The report; any violation points at a bug rather than bad input

    Raises:
        HypothesisNotMetError: when deg c <= m (normalize the start first)
    """
    d_c = start.d_c
    if d_c is None or d_c <= fam.m:
        raise HypothesisNotMetError(f"degree law needs deg c > m = {fam.m}, got deg c = {d_c}")
    pair = pair or IterPair(fam, start)
    pair.extend_to(n)
    d, s = fam.d, fam.s
    d_a = start.d_a
    c_p0 = fam.c_P0.lead
    c_a = start.a.lead
    report = DegreeLawReport(n)
    for k, (A, B) in enumerate(pair.levels[: n + 1]):
        expected_A = d_a * d ** k
        expected_B = d_a * d ** k - d_c * s ** k
        if A.degree != expected_A:
            report.violations.append(f"level {k}: deg A = {A.degree}, expected {expected_A}")
        if B.degree != expected_B:
            report.violations.append(f"level {k}: deg B = {B.degree}, expected {expected_B}")
        expected_lead = c_p0 ** ((d ** k - 1) // (d - 1)) * c_a ** (d ** k)
        if A.lead != expected_lead:
            report.violations.append(f"level {k}: lead A = {A.lead}, expected {expected_lead}")
        if poly_gcd(A, B).degree > 0:
            report.violations.append(f"level {k}: A and B share a factor")
    if report.violations:
        logger.warning("degree law violated: %s", "; ".join(report.violations))
    return report


def normalize_start(fam: MapFamily, start: StartPoint, cap: int = 8,
                    pair: Optional[IterPair] = None) -> Tuple[int, StartPoint]:
    """Smallest k <= cap with deg f^k(c) > m, and (A_k, B_k) as the new start.

    Raises:
        DegreeStagnationError: when no level up to cap clears m
    """
    pair = pair or IterPair(fam, start)
    for k in range(cap + 1):
        A, B = pair.level(k)
        if not A.is_zero and not B.is_zero and Fraction(A.degree - B.degree) > fam.m:
            if k:
                logger.info("start normalized after %d step(s)", k)
            return k, StartPoint(A, B)
    raise DegreeStagnationError(f"deg f^k(c) stays <= m = {fam.m} for k <= {cap}")
