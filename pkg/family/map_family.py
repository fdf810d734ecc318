"""One-parameter families f_λ = P_λ(x)/Q_λ(x) with coefficients in Q[λ], and moving start points."""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

from algebra.polynomials import BinaryForm, UniPoly
from algebra.rationals import as_rat
from algebra.resultants import poly_gcd, resultant_in_x
from dynamics.maps import ProjPointP1, RationalMap
from errors import InvalidArgumentError

logger = logging.getLogger(__name__)

Coefficient = Union[UniPoly, int, Fraction, str, Sequence[Union[int, Fraction, str]]]


def _as_lambda_poly(c: Coefficient) -> UniPoly:
    if isinstance(c, UniPoly):
        return c
    if isinstance(c, (list, tuple)):
        return UniPoly(c)
    return UniPoly.constant(as_rat(c))


def _trim(coeffs: List[UniPoly]) -> Tuple[UniPoly, ...]:
    while coeffs and coeffs[-1].is_zero:
        coeffs.pop()
    return tuple(coeffs)


def _slope(coeffs: Tuple[UniPoly, ...]) -> Fraction:
    """max over i >= 1 of deg c_i / i, where c_i is the coefficient of x^(deg - i)."""
    top = len(coeffs) - 1
    best = Fraction(0)
    for i in range(1, top + 1):
        c = coeffs[top - i]
        if c.is_zero:
            continue
        best = max(best, Fraction(c.degree, i))
    return best


@dataclass(frozen=True)
class MapFamily:
    """f_λ = P/Q where P, Q are polynomials in x whose coefficients are polynomials in λ.

    P and Q hold the λ-coefficients of x^0, x^1, ... in ascending order.
    """

    P: Tuple[UniPoly, ...]
    Q: Tuple[UniPoly, ...]

    def __init__(self, P: Sequence[Coefficient], Q: Sequence[Coefficient] = (1,)):
        object.__setattr__(self, "P", _trim([_as_lambda_poly(c) for c in P]))
        object.__setattr__(self, "Q", _trim([_as_lambda_poly(c) for c in Q]))
        if not self.P or not self.Q:
            raise InvalidArgumentError("P and Q of a family must be nonzero")

    @classmethod
    def from_json(cls, data: Dict) -> "MapFamily":
        """Build from {"P": [[λ-coeffs] per x-degree], "Q": [...]}."""
        try:
            return cls([UniPoly(row) for row in data["P"]], [UniPoly(row) for row in data.get("Q", [[1]])])
        except KeyError as exc:
            raise InvalidArgumentError(f"family spec is missing {exc}") from exc

    def to_json(self) -> Dict:
        return {"P": [c.to_json() for c in self.P], "Q": [c.to_json() for c in self.Q]}

    @property
    def d_P(self) -> int:
        return len(self.P) - 1

    @property
    def d_Q(self) -> int:
        return len(self.Q) - 1

    @property
    def d(self) -> int:
        return self.d_P

    @property
    def s(self) -> int:
        return self.d_P - self.d_Q

    @property
    def c_P0(self) -> UniPoly:
        """Leading coefficient of P in x."""
        return self.P[-1]

    @property
    def c_Q0(self) -> UniPoly:
        return self.Q[-1]

    @cached_property
    def m1(self) -> Fraction:
        return _slope(self.P)

    @cached_property
    def m2(self) -> Fraction:
        return _slope(self.Q) if self.d_Q > 0 else Fraction(0)

    @property
    def m(self) -> Fraction:
        return self.m1 + self.m2

    @cached_property
    def forms(self) -> Tuple[BinaryForm, BinaryForm]:
        """P and Q homogenized to the common degree d_P, so Q carries the factor Y^s."""
        return BinaryForm(self.P, self.d_P), BinaryForm(self.Q, self.d_P)

    @cached_property
    def resultant(self) -> UniPoly:
        """Res_x(P, Q) as a polynomial in λ."""
        return resultant_in_x(list(self.P), list(self.Q))

    @property
    def is_polynomial(self) -> bool:
        return self.d_Q == 0

    def specialize(self, lam: Union[Fraction, int, str]) -> RationalMap:
        """The map f_λ over Q at a rational parameter."""
        lam = as_rat(lam)
        return RationalMap(UniPoly([c(lam) for c in self.P]), UniPoly([c(lam) for c in self.Q]))

    def __str__(self) -> str:
        return f"P={self.to_json()['P']} Q={self.to_json()['Q']}"


@dataclass(frozen=True)
class StartPoint:
    """The moving point c = a/b with a, b coprime in Q[λ]."""

    a: UniPoly
    b: UniPoly

    def __post_init__(self):
        if self.a.is_zero and self.b.is_zero:
            raise InvalidArgumentError("start point cannot be 0/0")
        if poly_gcd(self.a, self.b).degree > 0:
            raise InvalidArgumentError(f"start point {self} has a common factor")

    @classmethod
    def of(cls, a: Coefficient, b: Coefficient = 1) -> "StartPoint":
        return cls(_as_lambda_poly(a), _as_lambda_poly(b))

    @classmethod
    def from_json(cls, data: Optional[Dict]) -> "StartPoint":
        data = data or {}
        return cls(UniPoly(data.get("a", [])), UniPoly(data.get("b", [1])))

    def to_json(self) -> Dict:
        return {"a": self.a.to_json(), "b": self.b.to_json()}

    @property
    def d_a(self) -> int:
        return self.a.degree

    @property
    def d_b(self) -> int:
        return self.b.degree

    @property
    def d_c(self) -> Optional[int]:
        """deg a - deg b, or None when c = 0 or c = ∞."""
        if self.a.is_zero or self.b.is_zero:
            return None
        return self.d_a - self.d_b

    def value_at(self, lam: Union[Fraction, int, str]) -> ProjPointP1:
        """c(λ₀) as a point of P¹(Q); a pole of c gives ∞."""
        lam = as_rat(lam)
        return ProjPointP1.of(self.a(lam), self.b(lam))

    def __str__(self) -> str:
        return f"({self.a.to_json()})/({self.b.to_json()})"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    witness: Optional[object] = None

    def to_json(self) -> Dict:
        witness = self.witness.to_json() if hasattr(self.witness, "to_json") else self.witness
        return {"name": self.name, "passed": self.passed, "detail": self.detail, "witness": witness}


@dataclass(frozen=True)
class ValidationReport:
    checks: Tuple[CheckResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def to_json(self) -> Dict:
        return {"passed": self.passed, "checks": [check.to_json() for check in self.checks]}


CONSTANT_LEADING = "constant_leading_coefficients"
CONSTANT_RESULTANT = "constant_resultant"
DEGREE_GAP = "degree_gap"


def validate_family(fam: MapFamily) -> ValidationReport:
    """Check the three family hypotheses and report each with a witness.

    1. The leading x-coefficients of P and Q are nonzero constants.
    2. Res_x(P, Q) is a nonzero constant.
    3. deg_x P >= deg_x Q + 2.
    """
    checks = []

    bad_leads = [name for name, lead in (("P", fam.c_P0), ("Q", fam.c_Q0)) if lead.degree != 0]
    checks.append(CheckResult(
        CONSTANT_LEADING,
        not bad_leads,
        "leading coefficients are nonzero constants" if not bad_leads
        else f"leading coefficient of {' and '.join(bad_leads)} depends on λ",
        [fam.c_P0.to_json(), fam.c_Q0.to_json()],
    ))

    res = fam.resultant
    checks.append(CheckResult(
        CONSTANT_RESULTANT,
        res.degree == 0,
        f"Res_x(P, Q) = {res.to_json()}" if res.degree == 0
        else f"Res_x(P, Q) = {res.to_json()} is not a nonzero constant",
        res,
    ))

    checks.append(CheckResult(
        DEGREE_GAP,
        fam.s >= 2,
        f"deg P - deg Q = {fam.s}" + ("" if fam.s >= 2 else ", needs at least 2"),
        fam.s,
    ))

    report = ValidationReport(tuple(checks))
    if not report.passed:
        logger.info("family %s fails %s", fam, ", ".join(c.name for c in report.failures))
    return report
