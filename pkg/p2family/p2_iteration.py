"""Exact bivariate iteration of the constant start point [a:b:1] over Q(λ, μ)."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

from algebra.polynomials import BiPoly
from algebra.rationals import as_rat, format_rat
from dynamics.heights import DEFAULT_MAX_BITS
from errors import InvalidArgumentError, InvariantViolationError, ResourceLimitError
from family.iteration import DEFAULT_MAX_DEGREE
from p2family.p2_map import P2Family, Rational

logger = logging.getLogger(__name__)


def _horner(coeffs, x: BiPoly) -> BiPoly:
    """Σ c_i x^i for integer c_i."""
    out = BiPoly.constant(0)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _size(poly: BiPoly) -> int:
    return len(poly.terms) * poly.max_coefficient_bits()


class P2IterPair:
    """Cached levels of

        A_{n+1} = P(A_n) + λ B_n,   B_{n+1} = Q(B_n) + μ A_n,

    from A_0 = a, B_0 = b; deg A_n = deg B_n = d^(n-1) for n >= 1.
    """

    def __init__(self, fam: P2Family, a: Rational, b: Rational, max_degree: int = DEFAULT_MAX_DEGREE,
                 max_bits: int = DEFAULT_MAX_BITS):
        self.fam = fam
        self.a, self.b = as_rat(a), as_rat(b)
        if self.a == 0 or self.b == 0:
            raise InvalidArgumentError("the start coordinates a and b must be nonzero")
        self.max_degree = max_degree
        self.max_bits = max_bits
        self._levels: List[Tuple[BiPoly, BiPoly]] = [(BiPoly.constant(self.a), BiPoly.constant(self.b))]

    @property
    def cached(self) -> int:
        return len(self._levels) - 1

    def extend_to(self, n: int) -> None:
        if n < 0:
            raise InvalidArgumentError("level must be nonnegative")
        lam, mu = BiPoly.lam(), BiPoly.mu()
        d = self.fam.d
        while self.cached < n:
            A, B = self._levels[-1]
            nxt_A = _horner(self.fam.P, A) + lam * B
            nxt_B = _horner(self.fam.Q, B) + mu * A
            level = self.cached + 1
            expected = d ** (level - 1)
            if expected > self.max_degree or _size(nxt_A) + _size(nxt_B) > self.max_bits:
                raise ResourceLimitError(f"P² level {level} exceeds the degree or size caps",
                                         list(self._levels))
            if nxt_A.total_degree != expected or nxt_B.total_degree != expected:
                raise InvariantViolationError(
                    f"level {level}: degrees ({nxt_A.total_degree}, {nxt_B.total_degree}), expected {expected}")
            self._levels.append((nxt_A, nxt_B))
            logger.debug("P² level %d: total degree %d, %d + %d terms", level, expected,
                         len(nxt_A.terms), len(nxt_B.terms))

    def level(self, n: int) -> Tuple[BiPoly, BiPoly]:
        self.extend_to(n)
        return self._levels[n]

    def evaluate(self, n: int, lam: Fraction, mu: Fraction) -> Tuple[Fraction, Fraction]:
        A, B = self.level(n)
        return A.evaluate(lam, mu), B.evaluate(lam, mu)

    def to_json(self) -> Dict:
        return {
            "a": format_rat(self.a), "b": format_rat(self.b),
            "levels": [{"n": n, "degree": A.total_degree, "A": A.to_json(), "B": B.to_json()}
                       for n, (A, B) in enumerate(self._levels)],
        }


def p2_iterate_symbolic(fam: P2Family, a: Rational, b: Rational, n: int,
                        max_degree: int = DEFAULT_MAX_DEGREE, max_bits: int = DEFAULT_MAX_BITS) -> P2IterPair:
    pair = P2IterPair(fam, a, b, max_degree, max_bits)
    pair.extend_to(n)
    return pair


@dataclass
class ThetaReport:
    """Top-degree parts of A_n, B_n against c^((d^(n-1)-1)/(d-1)) · start^(d^(n-1)) on t₂ = 0."""

    levels: List[Dict] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> Dict:
        return {"passed": self.passed, "levels": self.levels, "violations": self.violations}


def theta_constants(fam: P2Family, a: Fraction, b: Fraction, n: int) -> Tuple[Fraction, Fraction]:
    """Expected coefficients of λ^(d^(n-1)) in A_n and of μ^(d^(n-1)) in B_n."""
    d = fam.d
    top = d ** (n - 1)
    exponent = (top - 1) // (d - 1)
    return (Fraction(fam.c_P) ** exponent * b ** top, Fraction(fam.c_Q) ** exponent * a ** top)


def p2_theta_check(pair: P2IterPair, n: int) -> ThetaReport:
    """Check the restriction to the line at infinity for every level 1..n.

    On t₂ = 0 only the top-degree part of A_n survives; it must be the single
    monomial c_P^((d^(n-1)-1)/(d-1)) b^(d^(n-1)) λ^(d^(n-1)), and symmetrically
    for B_n with c_Q, a and μ. A nonzero constant there is what makes θ_n a
    morphism.

    Raises:
        InvariantViolationError: when a level disagrees
    """
    report = ThetaReport()
    pair.extend_to(n)
    for k in range(1, n + 1):
        A, B = pair.level(k)
        top = pair.fam.d ** (k - 1)
        want_A, want_B = theta_constants(pair.fam, pair.a, pair.b, k)
        got_A, got_B = A.homogeneous_part(top), B.homogeneous_part(top)
        report.levels.append({"n": k, "degree": top, "A_constant": format_rat(want_A),
                              "B_constant": format_rat(want_B)})
        if got_A != {(top, 0): want_A}:
            report.violations.append(f"level {k}: top part of A is {got_A}, expected {want_A}·λ^{top}")
        if got_B != {(0, top): want_B}:
            report.violations.append(f"level {k}: top part of B is {got_B}, expected {want_B}·μ^{top}")
    if report.violations:
        raise InvariantViolationError("; ".join(report.violations))
    return report
