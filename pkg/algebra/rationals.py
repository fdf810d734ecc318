"""Scalars: exact rationals, places, absolute values and radius-tracked approximations."""

import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, List, Union

import mpmath
from sympy import factorint

from errors import InvalidArgumentError

# Rat is the builtin exact rational; it normalizes on every operation.
Rat = Fraction

ARCH = "arch"
Place = Union[str, int]

_EPS = sys.float_info.epsilon


def as_rat(value: Union[int, str, Fraction]) -> Fraction:
    """Coerce an int, a "p/q" string or a Fraction into a Rat.

    Args:
        value: Value to convert

    Returns:
        The reduced rational
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidArgumentError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidArgumentError(f"not a rational: {value!r}") from exc
    raise InvalidArgumentError(f"not a rational: {value!r}")


def format_rat(x: Fraction) -> str:
    """Serialize as "p/q", with q omitted when it is 1."""
    return str(x)


def check_place(place: Place) -> Place:
    """Validate a place tag: "arch" or a prime number."""
    if place == ARCH:
        return place
    if isinstance(place, int) and not isinstance(place, bool) and place >= 2:
        if factorint(place) == {place: 1}:
            return place
    raise InvalidArgumentError(f"place must be 'arch' or a prime, got {place!r}")


def int_valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise InvalidArgumentError("valuation of 0 is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def rat_valuation(x: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    return int_valuation(x.numerator, p) - int_valuation(x.denominator, p)


def log_abs(x: Fraction, place: Place) -> float:
    """log |x|_v, with -inf for x = 0.

    Args:
        x: Rational value
        place: "arch" or a prime

    Returns:
        The logarithm of the normalized absolute value
    """
    if x == 0:
        return -math.inf
    if place == ARCH:
        return math.log(abs(x.numerator)) - math.log(x.denominator)
    return -rat_valuation(x, place) * math.log(place)


def abs_v(x: Fraction, place: Place) -> float:
    """|x|_v as a float."""
    if x == 0:
        return 0.0
    return math.exp(log_abs(x, place))


def log_plus(x: Fraction, place: Place) -> float:
    """log max(1, |x|_v)."""
    return max(0.0, log_abs(x, place))


def prime_factors(n: int) -> List[int]:
    """Sorted distinct primes dividing a nonzero integer."""
    n = abs(int(n))
    if n in (0, 1):
        return []
    return sorted(factorint(n))


def round_up(x: float) -> float:
    """Next float at or above x, used to keep error ledgers monotone."""
    return math.nextafter(x, math.inf)


@dataclass(frozen=True)
class RealApprox:
    """A real value with a certified (over-approximated) error radius."""

    value: float
    error_radius: float

    def __post_init__(self):
        if not (self.error_radius >= 0 and math.isfinite(self.error_radius)):
            raise InvalidArgumentError("error radius must be finite and nonnegative")

    def __float__(self) -> float:
        return self.value

    def __add__(self, other: "RealApprox") -> "RealApprox":
        value = self.value + other.value
        radius = self.error_radius + other.error_radius + abs(value) * _EPS
        return RealApprox(value, round_up(radius))

    def contains(self, x: float) -> bool:
        return abs(x - self.value) <= self.error_radius


@dataclass(frozen=True)
class ComplexApprox:
    """A complex value with an error radius; arithmetic only ever widens radii.

    When `precise` holds an mpmath value the disk is centered there and the
    float parts are its rounding; `float_radius` covers the value from the
    float center.
    """

    real: float
    imaginary: float
    error_radius: float
    precise: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not (self.error_radius >= 0 and math.isfinite(self.error_radius)):
            raise InvalidArgumentError("error radius must be finite and nonnegative")

    @classmethod
    def from_mpc(cls, z, radius) -> "ComplexApprox":
        """Keep an mpmath value as the center, with float parts for display and float arithmetic."""
        if not isinstance(z, mpmath.mpc):
            z = mpmath.mpc(z)
        return cls(float(z.real), float(z.imag), round_up(float(radius)), z)

    @property
    def center(self) -> complex:
        return complex(self.real, self.imaginary)

    def to_mpc(self):
        if self.precise is not None:
            return self.precise
        return mpmath.mpc(self.real, self.imaginary)

    @property
    def float_radius(self) -> float:
        if self.precise is None:
            return self.error_radius
        rounding = float(abs(self.precise - mpmath.mpc(self.real, self.imaginary)))
        return round_up(self.error_radius + rounding + abs(self.center) * _EPS)

    def __abs__(self) -> float:
        return abs(self.center)

    def __add__(self, other: "ComplexApprox") -> "ComplexApprox":
        z = self.center + other.center
        radius = self.float_radius + other.float_radius + abs(z) * _EPS
        return ComplexApprox(z.real, z.imag, round_up(radius))

    def __sub__(self, other: "ComplexApprox") -> "ComplexApprox":
        return self + ComplexApprox(-other.real, -other.imaginary, other.float_radius)

    def __mul__(self, other: "ComplexApprox") -> "ComplexApprox":
        z = self.center * other.center
        r, s = self.float_radius, other.float_radius
        radius = (abs(self) * s + abs(other) * r + r * s + 2 * abs(z) * _EPS)
        return ComplexApprox(z.real, z.imag, round_up(radius))

    def abs_bounds(self):
        """Lower and upper bounds for |z| over the disk."""
        radius = self.float_radius
        return max(0.0, abs(self) - radius), abs(self) + radius

    def to_json(self) -> dict:
        return {"re": self.real, "im": self.imaginary, "radius": self.float_radius}
