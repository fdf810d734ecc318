"""Weil and canonical heights over Q, with per-place breakdown and error radii.

Local heights use the integral primitive lift F = (P_int, Q_int) of the map:

    ĥ_v(x) = lim log‖F^n(x, 1)‖_v / d^n,

so at places of good reduction ĥ_v(x) = log⁺|x|_v exactly, and the local
values over all places sum to the global canonical height.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Dict, List, Optional, Tuple, Union

import mpmath

from algebra.polynomials import UniPoly
from algebra.rationals import ARCH, Place, as_rat, check_place, int_valuation, prime_factors, round_up
from algebra.resultants import resultant_in_x
from algebra.roots import AlgNum, log_mahler_measure
from dynamics.maps import (PointLike, ProjPointP1, RationalMap, as_point, bad_places, height_box_constant,
                           local_log_bounds)
from errors import InvalidArgumentError, InvariantViolationError, ResourceLimitError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_ALG_LEVELS = 10
DEFAULT_MAX_BITS = 1_000_000
WORK_DPS = 40
_MAX_LEVELS = 4000


@dataclass(frozen=True)
class HeightResult:
    """A height value, its error radius and the per-place contributions."""

    value: float
    error_radius: float
    breakdown: Tuple[Tuple[Place, float], ...] = ()
    certified: bool = True

    def to_json(self) -> Dict:
        return {
            "value": self.value,
            "error_radius": self.error_radius,
            "certified": self.certified,
            "breakdown": [[str(place), local] for place, local in self.breakdown],
        }


def weil_height(x: Union[Fraction, int, str]) -> float:
    """log max(|num|, den) of a reduced rational."""
    x = as_rat(x)
    return math.log(max(abs(x.numerator), x.denominator))


def levels_needed(spread: float, d: int, tol: float) -> int:
    """Smallest N with spread / (d^N (d-1)) < tol."""
    if spread <= 0:
        return 0
    n = 0
    while spread / (d ** n * (d - 1)) >= tol:
        n += 1
        if n > _MAX_LEVELS:
            raise ResourceLimitError(f"tolerance {tol} needs more than {_MAX_LEVELS} levels")
    return n


def _arch_local(f: RationalMap, pt: ProjPointP1, tol: float) -> Tuple[float, float]:
    lower, upper = local_log_bounds(f, ARCH)
    spread = max(abs(lower), abs(upper))
    d = f.degree
    levels = levels_needed(spread, d, tol)
    p_int, q_int = f.lift
    with mpmath.workdps(WORK_DPS):
        X, Y = mpmath.mpf(pt.X), mpmath.mpf(pt.Y)
        size = max(abs(X), abs(Y))
        # log‖(x, 1)‖ = log max(|X|, |Y|) - log|Y|
        total = mpmath.log(size) - (mpmath.log(Y) if pt.Y else 0)
        X, Y = X / size, Y / size
        scale = mpmath.mpf(1)
        for _ in range(levels):
            scale *= d
            nx = mpmath.fsum(c * X ** i * Y ** (d - i) for i, c in enumerate(p_int) if c)
            ny = mpmath.fsum(c * X ** i * Y ** (d - i) for i, c in enumerate(q_int) if c)
            norm = max(abs(nx), abs(ny))
            total += mpmath.log(norm) / scale
            X, Y = nx / norm, ny / norm
        value = float(total)
    rounding = (levels + 1) * 10.0 ** (-(WORK_DPS - 8)) + abs(value) * 2.3e-16
    tail = spread / (d ** levels * (d - 1)) if spread > 0 else 0.0
    return value, round_up(tail + rounding)


def _padic_local(f: RationalMap, pt: ProjPointP1, p: int, tol: float) -> Tuple[float, float]:
    """Iterate the lift in Z/p^K, tracking exact valuations; returns (value, tail)."""
    start = Fraction(int_valuation(pt.Y, p)) if pt.Y else Fraction(0)
    slack = int_valuation(f.certificate_scale, p)
    if slack == 0:
        # the lift reduces to a morphism mod p: no correction terms
        return float(start) * math.log(p), 0.0
    d = f.degree
    spread = slack * math.log(p)
    levels = levels_needed(spread, d, tol)
    precision = (slack + 1) * (levels + 1) + 1
    p_int, q_int = f.lift
    X, Y = pt.X % p ** precision, pt.Y % p ** precision
    exponent = start
    for k in range(levels):
        modulus = p ** precision
        nx = sum(c * pow(X, i, modulus) * pow(Y, d - i, modulus) for i, c in enumerate(p_int)) % modulus
        ny = sum(c * pow(X, i, modulus) * pow(Y, d - i, modulus) for i, c in enumerate(q_int)) % modulus
        drop = min(truncated_valuation(nx, p, precision), truncated_valuation(ny, p, precision))
        if drop > slack:
            raise InvariantViolationError(f"p-adic drop {drop} exceeds the certificate bound {slack} at p={p}")
        exponent -= Fraction(drop, d ** (k + 1))
        precision -= drop
        X, Y = (nx // p ** drop) % p ** precision, (ny // p ** drop) % p ** precision
    tail = spread / (d ** levels * (d - 1))
    return float(exponent) * math.log(p), round_up(tail + abs(float(exponent)) * math.log(p) * 2.3e-16)


def truncated_valuation(n: int, p: int, cap: int) -> int:
    if n == 0:
        return cap
    return min(int_valuation(n, p), cap)


def _local(f: RationalMap, pt: ProjPointP1, place: Place, tol: float,
           bad: Optional[set] = None) -> Tuple[float, float]:
    if place == ARCH:
        return _arch_local(f, pt, tol)
    bad = bad_places(f) if bad is None else bad
    if place not in bad:
        if pt.is_infinity:
            return 0.0, 0.0
        return int_valuation(pt.Y, place) * math.log(place), 0.0
    return _padic_local(f, pt, place, tol)


def local_canonical_height(f: RationalMap, x: PointLike, place: Place, tol: float = DEFAULT_TOL) -> float:
    """Local canonical height at one place.

    Good primes use the closed form log⁺|x|_p. The archimedean place and the
    bad primes iterate the lift with max-normalization and stop once the
    geometric tail bound drops below tol.

    Args:
        f: Rational map
        x: Point (rational or ProjPointP1)
        place: "arch" or a prime
        tol: Absolute tolerance, > 0

    Returns:
        The local height within tol
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    value, _ = _local(f, as_point(x), check_place(place), tol)
    return value


def height_places(f: RationalMap, pt: ProjPointP1) -> List[Place]:
    """arch, the bad primes, and the good primes where log⁺|x|_p > 0."""
    primes = set(bad_places(f))
    if not pt.is_infinity:
        primes.update(prime_factors(pt.Y))
    return [ARCH] + sorted(primes)


def canonical_height(f: RationalMap, x: PointLike, tol: float = DEFAULT_TOL) -> HeightResult:
    """Global canonical height as the sum of local canonical heights.

    Args:
        f: Rational map
        x: Point (rational or ProjPointP1)
        tol: Absolute tolerance for the total, > 0

    Returns:
        HeightResult whose breakdown sums to its value
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    pt = as_point(x)
    bad = bad_places(f)
    places = height_places(f, pt)
    share = tol / len(places)
    breakdown = []
    radius = 0.0
    for place in places:
        local, local_radius = _local(f, pt, place, share, bad)
        breakdown.append((place, local))
        radius += local_radius
    value = math.fsum(local for _, local in breakdown)
    radius = round_up(radius + len(places) * abs(value) * 2.3e-16)
    logger.debug("ĥ(%s) = %.12g ± %.3g over %d places", pt, value, radius, len(places))
    return HeightResult(value, radius, tuple(breakdown))


def _joint_primitive(a: UniPoly, b: UniPoly) -> Tuple[UniPoly, UniPoly]:
    """Divide a and b by their common rational content."""
    coeffs = [c for c in a.coefficients + b.coefficients if c != 0]
    if not coeffs:
        return a, b
    num = reduce(gcd, (c.numerator for c in coeffs), 0)
    den = reduce(lcm, (c.denominator for c in coeffs), 1)
    content = Fraction(num, den)
    return a.scale(1 / content), b.scale(1 / content)


def conjugate_height(m: UniPoly, a: UniPoly, b: UniPoly, max_bits: int) -> Tuple[float, float, int]:
    """Average Weil height of [a(α):b(α)] over the roots α of m.

    Res_t(m(t), x·b(t) - a(t)) vanishes exactly at the conjugate values; its
    primitive Mahler measure divided by deg m is the averaged height.
    """
    width = max(len(a.coefficients), len(b.coefficients))
    a_c = list(a.coefficients) + [Fraction(0)] * (width - len(a.coefficients))
    b_c = list(b.coefficients) + [Fraction(0)] * (width - len(b.coefficients))
    linear = [UniPoly([-ai, bi]) for ai, bi in zip(a_c, b_c)]
    conj = resultant_in_x(list(m.coefficients), linear)
    bits = conj.max_coefficient_bits()
    if bits > max_bits:
        return math.nan, math.nan, bits
    _, prim = conj.primitive_integer()
    measure = log_mahler_measure(prim)
    return measure.value / m.degree, measure.error_radius / m.degree, bits


def canonical_height_alg(f: RationalMap, alpha: AlgNum, tol: float = 1e-6,
                         max_levels: int = DEFAULT_ALG_LEVELS, max_bits: int = DEFAULT_MAX_BITS) -> HeightResult:
    """Canonical height at an algebraic point, averaged over its conjugates.

    Iterates (P_n, Q_n) in Q[t]/(m) symbolically, takes h(f^n(α)) from the
    Mahler measure of Res_t(m, x·Q_n - P_n) and returns h(f^n(α))/d^n. The
    radius is the smaller of the box bound C₀/((d-1)d^n) and the
    successive-difference tail estimate, plus the Mahler radius; results are
    flagged non-certified.

    Args:
        f: Rational map over Q
        alpha: Algebraic point
        tol: Target radius
        max_levels: Iteration cap
        max_bits: Coefficient size cap for the conjugate polynomial

    Returns:
        HeightResult with an empty breakdown and certified=False
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    rational = alpha.as_rational()
    if rational is not None:
        return canonical_height(f, rational, tol)
    m = alpha.defining_poly
    d = f.degree
    box = height_box_constant(f) / (d - 1)
    P_form, Q_form = f.lift_forms
    a, b = UniPoly.gen(), UniPoly.constant(1)
    h0, r0, _ = conjugate_height(m, a, b, max_bits)
    previous = h0
    result = HeightResult(h0, round_up(box + r0), (), False)
    for n in range(1, max_levels + 1):
        a, b = P_form.evaluate(a, b) % m, Q_form.evaluate(a, b) % m
        a, b = _joint_primitive(a, b)
        h_n, r_n, bits = conjugate_height(m, a, b, max_bits)
        if math.isnan(h_n):
            raise ResourceLimitError(f"conjugate polynomial at level {n} has {bits} coefficient bits", result)
        estimate = h_n / d ** n
        tail = min(box / d ** n, abs(estimate - previous) / (d - 1))
        result = HeightResult(estimate, round_up(tail + r_n / d ** n), (), False)
        logger.debug("level %d: h/d^n = %.12g (tail %.3g)", n, estimate, tail)
        if n >= 2 and result.error_radius < tol:
            break
        previous = estimate
    return result
