"""Rational maps on P¹ over Q: homogeneous iteration, bad places and exact orbit classification."""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd, lcm
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from algebra.polynomials import BinaryForm, UniPoly
from algebra.rationals import ARCH, Place, as_rat, check_place, int_valuation, prime_factors, round_up
from algebra.resultants import BezoutCertificate, bezout_certificates, form_resultant
from errors import InvalidArgumentError, ResourceLimitError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjPointP1:
    """A point [X:Y] of P¹(Q) stored as coprime integers with Y >= 0 ([1:0] at infinity)."""

    X: int
    Y: int

    def __post_init__(self):
        if self.X == 0 and self.Y == 0:
            raise InvalidArgumentError("[0:0] is not a point of P¹")
        if gcd(self.X, self.Y) != 1 or self.Y < 0 or (self.Y == 0 and self.X != 1):
            raise InvalidArgumentError(f"[{self.X}:{self.Y}] is not in canonical form; use ProjPointP1.of")

    @classmethod
    def of(cls, X: Union[int, Fraction, str], Y: Union[int, Fraction, str] = 1) -> "ProjPointP1":
        """Canonical representative of [X:Y] for any rational coordinates."""
        x, y = as_rat(X), as_rat(Y)
        if x == 0 and y == 0:
            raise InvalidArgumentError("[0:0] is not a point of P¹")
        den = lcm(x.denominator, y.denominator)
        a, b = int(x * den), int(y * den)
        g = gcd(a, b)
        a, b = a // g, b // g
        if b < 0 or (b == 0 and a < 0):
            a, b = -a, -b
        return cls(a, b)

    @classmethod
    def infinity(cls) -> "ProjPointP1":
        return cls(1, 0)

    @property
    def is_infinity(self) -> bool:
        return self.Y == 0

    def affine(self) -> Optional[Fraction]:
        """x = X/Y, or None at infinity."""
        return None if self.is_infinity else Fraction(self.X, self.Y)

    def weil_height(self) -> float:
        return math.log(max(abs(self.X), abs(self.Y)))

    def __str__(self) -> str:
        return f"[{self.X}:{self.Y}]"

    def to_json(self) -> List[int]:
        return [self.X, self.Y]


PointLike = Union[ProjPointP1, Fraction, int, str]


def as_point(pt: PointLike) -> ProjPointP1:
    """Accept a ProjPointP1, a rational, or "inf"."""
    if isinstance(pt, ProjPointP1):
        return pt
    if isinstance(pt, str) and pt.strip().lower() in ("inf", "infinity", "oo"):
        return ProjPointP1.infinity()
    return ProjPointP1.of(pt)


def eval_int_form(coeffs: Sequence[int], X: int, Y: int) -> int:
    """Σ c_i X^i Y^(d-i) over the integers."""
    d = len(coeffs) - 1
    y_pows = [1] * (d + 1)
    for k in range(1, d + 1):
        y_pows[k] = y_pows[k - 1] * Y
    total = 0
    x_pow = 1
    for i, c in enumerate(coeffs):
        if c:
            total += c * x_pow * y_pows[d - i]
        x_pow *= X
    return total


@dataclass(frozen=True)
class RationalMap:
    """f = P/Q with rational coefficients, of degree d = max(deg P, deg Q) >= 2.

    All height and orbit code works with a single integral primitive lift
    (P_int, Q_int) of the homogenized pair, so the integer vectors it
    produces satisfy the product formula place by place.
    """

    P: UniPoly
    Q: UniPoly

    def __post_init__(self):
        if self.Q.is_zero:
            raise InvalidArgumentError("denominator of a rational map cannot be zero")
        if self.degree < 2:
            raise InvalidArgumentError(f"rational map must have degree >= 2, got {self.degree}")
        if self.resultant == 0:
            raise InvalidArgumentError(f"{self} is not a morphism: Res(P, Q) = 0")

    @classmethod
    def polynomial(cls, coefficients: Sequence[Union[int, Fraction, str]]) -> "RationalMap":
        """The polynomial map with the given ascending coefficients."""
        return cls(UniPoly(coefficients), UniPoly.constant(1))

    @classmethod
    def from_json(cls, data: Dict) -> "RationalMap":
        return cls(UniPoly.from_json(data["P"]), UniPoly.from_json(data.get("Q", ["1"])))

    def to_json(self) -> Dict:
        return {"P": self.P.to_json(), "Q": self.Q.to_json()}

    def __str__(self) -> str:
        return f"({self.P.to_json()})/({self.Q.to_json()})"

    @property
    def degree(self) -> int:
        return max(self.P.degree, self.Q.degree)

    @property
    def is_polynomial(self) -> bool:
        return self.Q.degree == 0

    @cached_property
    def lift(self) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """Coprime integer coefficients of (Y^d P(X/Y), Y^d Q(X/Y)), index i at X^i Y^(d-i)."""
        d = self.degree
        p = list(self.P.coefficients) + [Fraction(0)] * (d + 1 - len(self.P.coefficients))
        q = list(self.Q.coefficients) + [Fraction(0)] * (d + 1 - len(self.Q.coefficients))
        den = reduce(lcm, (c.denominator for c in p + q), 1)
        ints_p = [int(c * den) for c in p]
        ints_q = [int(c * den) for c in q]
        g = reduce(gcd, ints_p + ints_q, 0)
        return tuple(c // g for c in ints_p), tuple(c // g for c in ints_q)

    @cached_property
    def lift_forms(self) -> Tuple[BinaryForm, BinaryForm]:
        p, q = self.lift
        d = self.degree
        return BinaryForm([Fraction(c) for c in p], d), BinaryForm([Fraction(c) for c in q], d)

    @cached_property
    def resultant(self) -> int:
        """Resultant of the integral lift; nonzero exactly when f is a morphism."""
        return int(form_resultant(*self.lift_forms))

    @cached_property
    def certificate(self) -> BezoutCertificate:
        """Bezout certificate of the integral lift."""
        return bezout_certificates(*self.lift_forms)

    @cached_property
    def certificate_scale(self) -> int:
        """The integer s with s·X^t and s·Y^t in the ideal (P_int, Q_int) over Z."""
        return self.certificate.scale

    @cached_property
    def certificate_norm(self) -> Fraction:
        """max(‖sS‖₁ + ‖sT‖₁, ‖sU‖₁ + ‖sV‖₁) for the integral certificate."""
        cert = self.certificate
        s = cert.scale

        def l1(form: BinaryForm) -> Fraction:
            return sum((abs(Fraction(c)) * s for c in form.coefficients), Fraction(0))

        return max(l1(cert.S) + l1(cert.T), l1(cert.U) + l1(cert.V))

    def apply_lift(self, X: int, Y: int) -> Tuple[int, int]:
        """(P_int(X, Y), Q_int(X, Y)) without normalization."""
        p, q = self.lift
        return eval_int_form(p, X, Y), eval_int_form(q, X, Y)

    def __call__(self, x: Union[Fraction, int]) -> Optional[Fraction]:
        """Affine evaluation P(x)/Q(x); None when the image is infinity."""
        x = as_rat(x)
        num, den = self.P(x), self.Q(x)
        if den == 0:
            return None
        return num / den


def homogeneous_step(f: RationalMap, pt: PointLike) -> ProjPointP1:
    """Apply f to a point of P¹ through the homogeneous lift.

    Args:
        f: Rational map
        pt: Point (or rational, or "inf")

    Returns:
        [P(X, Y) : Q(X, Y)] in canonical form
    """
    pt = as_point(pt)
    a, b = f.apply_lift(pt.X, pt.Y)
    return ProjPointP1.of(a, b)


def bad_places(f: RationalMap) -> Set[int]:
    """Primes of possibly bad reduction.

    The primes dividing the resultant of the integral lift, the leading
    coefficients of P and Q after clearing denominators, or any coefficient
    denominator. Off this set the lift has good reduction.
    """
    primes: Set[int] = set(prime_factors(f.resultant))
    p_int, q_int = f.lift
    for coeffs, degree in ((p_int, f.P.degree), (q_int, f.Q.degree)):
        primes.update(prime_factors(coeffs[degree]))
    for c in f.P.coefficients + f.Q.coefficients:
        primes.update(prime_factors(c.denominator))
    return primes


def local_log_bounds(f: RationalMap, place: Place) -> Tuple[float, float]:
    """Bounds lo <= log‖F(v)‖_v <= hi for every v with ‖v‖_v = 1 (max norm).

    Archimedean: hi from the l1 norms of the lift's coefficients, lo from the
    Bezout certificate s·X^t = S'P + T'Q. At a prime p: hi = 0 since the lift
    is integral, lo = log|s|_p.
    """
    place = check_place(place)
    if place == ARCH:
        p_int, q_int = f.lift
        upper = max(sum(abs(c) for c in p_int), sum(abs(c) for c in q_int))
        lower = math.log(f.certificate_scale) - math.log(f.certificate_norm)
        return lower, math.log(upper)
    return -int_valuation(f.certificate_scale, place) * math.log(place), 0.0


def height_box_constant(f: RationalMap) -> float:
    """C₀ with |h(f(x)) - d·h(x)| <= C₀ for every x in P¹(Q).

    With coprime integers (X, Y): the image height is at most log C_sum above
    d·h(x), and the gcd of P(X, Y), Q(X, Y) divides s, which gives the lower
    side -log B. The float result is rounded up.
    """
    p_int, q_int = f.lift
    c_sum = max(sum(abs(c) for c in p_int), sum(abs(c) for c in q_int))
    norm = f.certificate_norm
    value = max(0.0, math.log(c_sum), math.log(norm.numerator) - math.log(norm.denominator))
    return round_up(value) if value > 0 else 0.0


@dataclass(frozen=True)
class Preperiodic:
    preperiod: int
    period: int

    def to_json(self) -> Dict:
        return {"kind": "preperiodic", "preperiod": self.preperiod, "period": self.period}


@dataclass(frozen=True)
class Wandering:
    witness_index: int
    height_bound: float

    def to_json(self) -> Dict:
        return {"kind": "wandering", "witness_index": self.witness_index, "height_bound": self.height_bound}


@dataclass(frozen=True)
class OrbitResult:
    """Classification of an orbit, with the prefix of points visited."""

    kind: Union[Preperiodic, Wandering]
    orbit_prefix: Tuple[ProjPointP1, ...]

    @property
    def is_preperiodic(self) -> bool:
        return isinstance(self.kind, Preperiodic)

    def to_json(self) -> Dict:
        out = self.kind.to_json()
        out["orbit"] = [str(p) for p in self.orbit_prefix]
        return out


# float slack on the witness comparison; log of big ints is accurate to far less
_HEIGHT_SLACK = 1e-9


def orbit_detect(f: RationalMap, pt: PointLike, max_steps: Optional[int] = None) -> OrbitResult:
    """Decide exactly whether pt is preperiodic for f.

    Preperiodic points have canonical height 0, so every point of their orbit
    has Weil height at most C₀/(d-1). The orbit is iterated until it either
    leaves that height box (Wandering, the first such index is the witness)
    or returns to a point already seen (Preperiodic). Both happen in finitely
    many steps because there are finitely many rationals in the box.

    Args:
        f: Rational map
        pt: Starting point
        max_steps: Optional safety cap; exceeding it raises ResourceLimitError

    Returns:
        The classification and the orbit prefix
    """
    bound = height_box_constant(f) / (f.degree - 1)
    seen: Dict[ProjPointP1, int] = {}
    orbit: List[ProjPointP1] = []
    current = as_point(pt)
    index = 0
    while True:
        if current in seen:
            first = seen[current]
            logger.debug("orbit of %s closes at step %d (preperiod %d)", pt, index, first)
            return OrbitResult(Preperiodic(first, index - first), tuple(orbit))
        if current.weil_height() > bound + _HEIGHT_SLACK:
            orbit.append(current)
            logger.debug("orbit of %s leaves the height box %.6g at step %d", pt, bound, index)
            return OrbitResult(Wandering(index, bound), tuple(orbit))
        if max_steps is not None and index >= max_steps:
            raise ResourceLimitError(f"orbit not classified within {max_steps} steps", tuple(orbit))
        seen[current] = index
        orbit.append(current)
        current = homogeneous_step(f, current)
        index += 1
