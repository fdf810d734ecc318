"""The metric sequence ‖·‖_{v,n} on sections u0·a + u1·b, evaluated at one parameter.

At level n and place v,

    ‖u0 a + u1 b‖_{v,n}(λ) = |u0 a(λ) + u1 b(λ)|_v / M_n(λ)^(1/d^n),

with M_n = max(|A_n|_v, |B_n|_v) at a prime and sqrt(|A_n|² + |B_n|²) at
the archimedean place. Everything is computed in logarithms so that the
huge values of A_n(λ) never overflow.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath

from algebra.rationals import ARCH, ComplexApprox, Place, as_rat, check_place, log_abs, rat_valuation
from errors import InvalidArgumentError
from family.iteration import IterPair

logger = logging.getLogger(__name__)

ETA = "eta"

Parameter = Union[Fraction, int, str, ComplexApprox]


def log_max_norm(A: Fraction, B: Fraction, place: Place) -> float:
    """log max(|A|_v, |B|_v) for rationals, not both zero."""
    return max(log_abs(A, place), log_abs(B, place))


def exact_max_valuation(A: Fraction, B: Fraction, p: int) -> int:
    """min(v_p(A), v_p(B)), i.e. -log_p max(|A|_p, |B|_p)."""
    return min(rat_valuation(x, p) for x in (A, B) if x != 0)


def _mp(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


def _log_l2(A, B) -> float:
    """log sqrt(|A|² + |B|²) for rationals or mpmath complex values."""
    if isinstance(A, Fraction) and isinstance(B, Fraction):
        big = max(abs(A), abs(B))
        if big == 0:
            return -math.inf
        ratio = min(abs(A), abs(B)) / big
        return log_abs(big, ARCH) + 0.5 * math.log1p(float(ratio * ratio))
    return float(mpmath.log(mpmath.sqrt(abs(A) ** 2 + abs(B) ** 2)))


@dataclass(frozen=True)
class MetricLevel:
    """Level n of the metric sequence at one place, bound to an iteration cache."""

    pair: IterPair
    n: int
    place: Place = ARCH

    def __post_init__(self):
        if self.n < 0:
            raise InvalidArgumentError("metric level must be nonnegative")
        check_place(self.place)

    def log_scale(self, lam: Parameter) -> float:
        """(1/d^n) log M_n(λ)."""
        A, B = self.pair.level(self.n)
        d_n = self.pair.fam.d ** self.n
        if isinstance(lam, ComplexApprox):
            z = lam.to_mpc()
            return _log_l2(A(z), B(z)) / d_n
        lam = as_rat(lam)
        a_val, b_val = A(lam), B(lam)
        if self.place == ARCH:
            return _log_l2(a_val, b_val) / d_n
        return -exact_max_valuation(a_val, b_val, self.place) * math.log(self.place) / d_n

    def evaluate(self, u0: Fraction, u1: Fraction, lam: Parameter) -> float:
        start = self.pair.start
        if isinstance(lam, str) and lam == ETA:
            return self._at_eta(u0, u1)
        if isinstance(lam, ComplexApprox):
            if self.place != ARCH:
                raise InvalidArgumentError("a complex parameter needs the archimedean place")
            z = lam.to_mpc()
            section = abs(_mp(u0) * start.a(z) + _mp(u1) * start.b(z))
            if section == 0:
                return 0.0
            return float(mpmath.exp(mpmath.log(section) - self.log_scale(lam)))
        lam = as_rat(lam)
        section = u0 * start.a(lam) + u1 * start.b(lam)
        if section == 0:
            return 0.0
        logger.debug("metric at λ=%s, level %d, place %s", lam, self.n, self.place)
        return math.exp(log_abs(section, self.place) - self.log_scale(lam))

    def _at_eta(self, u0: Fraction, u1: Fraction) -> float:
        """Closed-form value at λ = ∞: |u0|_v / |c_{P,0}|_v^((d^n - 1)/(d^n (d - 1)))."""
        start = self.pair.start
        if start.d_c is None or start.d_c <= 0:
            raise InvalidArgumentError("the value at eta needs deg a > deg b")
        if u0 == 0:
            return 0.0
        d = self.pair.fam.d
        exponent = Fraction(d ** self.n - 1, d ** self.n * (d - 1))
        c_p0 = self.pair.fam.c_P0.lead
        return math.exp(log_abs(u0, self.place) - float(exponent) * log_abs(c_p0, self.place))


def metric_eval(pair: IterPair, u0: Union[Fraction, int, str], u1: Union[Fraction, int, str],
                lam: Union[Parameter, str], place: Place, n: int) -> float:
    """‖u0·a + u1·b‖_{v,n} at λ.

    Args:
        pair: Iteration cache of the family and start point
        u0: Coefficient of a in the section
        u1: Coefficient of b in the section
        lam: Rational parameter, a complex approximation (archimedean only) or "eta"
        place: "arch" or a prime
        n: Level

    Returns:
        The nonnegative metric value
    """
    u0, u1 = as_rat(u0), as_rat(u1)
    if u0 == 0 and u1 == 0:
        raise InvalidArgumentError("section (u0, u1) must be nonzero")
    return MetricLevel(pair, n, check_place(place)).evaluate(u0, u1, lam)
