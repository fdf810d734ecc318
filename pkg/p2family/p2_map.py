"""The two-parameter family [P(X,Z) + λYZ^(d-1) : Q(Y,Z) + μXZ^(d-1) : Z^d] on P²."""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd, lcm
from typing import Dict, List, Sequence, Tuple, Union

from algebra.rationals import as_rat, prime_factors
from errors import InvalidArgumentError, InvariantViolationError

logger = logging.getLogger(__name__)

Rational = Union[Fraction, int, str]


@dataclass(frozen=True)
class ProjPointP2:
    """A point [X:Y:Z] of P²(Q) as coprime integers whose last nonzero coordinate is positive."""

    X: int
    Y: int
    Z: int

    def __post_init__(self):
        coords = (self.X, self.Y, self.Z)
        if not any(coords):
            raise InvalidArgumentError("[0:0:0] is not a point of P²")
        last = next(c for c in reversed(coords) if c)
        if reduce(gcd, coords) != 1 or last < 0:
            raise InvalidArgumentError(f"{self} is not in canonical form; use ProjPointP2.of")

    @classmethod
    def of(cls, X: Rational, Y: Rational, Z: Rational = 1) -> "ProjPointP2":
        coords = [as_rat(c) for c in (X, Y, Z)]
        if not any(coords):
            raise InvalidArgumentError("[0:0:0] is not a point of P²")
        den = reduce(lcm, (c.denominator for c in coords), 1)
        ints = [int(c * den) for c in coords]
        g = reduce(gcd, ints)
        ints = [c // g for c in ints]
        if next(c for c in reversed(ints) if c) < 0:
            ints = [-c for c in ints]
        return cls(*ints)

    @classmethod
    def from_json(cls, data: Sequence[Rational]) -> "ProjPointP2":
        if len(data) not in (2, 3):
            raise InvalidArgumentError("a P² point needs 2 affine or 3 projective coordinates")
        return cls.of(*data)

    @property
    def coords(self) -> Tuple[int, int, int]:
        return self.X, self.Y, self.Z

    def weil_height(self) -> float:
        return math.log(max(abs(c) for c in self.coords))

    def __str__(self) -> str:
        return f"[{self.X}:{self.Y}:{self.Z}]"

    def to_json(self) -> List[int]:
        return list(self.coords)


def _eval_form(coeffs: Sequence[int], x, z):
    """Σ c_i x^i z^(d-i)."""
    d = len(coeffs) - 1
    return sum(c * x ** i * z ** (d - i) for i, c in enumerate(coeffs) if c)


@dataclass(frozen=True)
class P2Family:
    """P and Q hold integer coefficients of X^i Z^(d-i) and Y^i Z^(d-i), i ascending."""

    P: Tuple[int, ...]
    Q: Tuple[int, ...]

    def __init__(self, P: Sequence[int], Q: Sequence[int]):
        object.__setattr__(self, "P", tuple(int(c) for c in P))
        object.__setattr__(self, "Q", tuple(int(c) for c in Q))
        if len(self.P) != len(self.Q):
            raise InvalidArgumentError("P and Q must have the same degree")
        if self.d < 3:
            raise InvalidArgumentError(f"the P² family needs d >= 3, got {self.d}")
        if self.c_P == 0 or self.c_Q == 0:
            raise InvalidArgumentError("P(X,0) and Q(Y,0) must be nonzero")

    @classmethod
    def from_json(cls, data: Dict) -> "P2Family":
        return cls(data["P"], data["Q"])

    def to_json(self) -> Dict:
        return {"P": list(self.P), "Q": list(self.Q)}

    @property
    def d(self) -> int:
        return len(self.P) - 1

    @property
    def c_P(self) -> int:
        return self.P[-1]

    @property
    def c_Q(self) -> int:
        return self.Q[-1]

    def P_affine(self, z):
        """P(z, 1)."""
        return _eval_form(self.P, z, 1)

    def Q_affine(self, z):
        return _eval_form(self.Q, z, 1)

    def specialize(self, lam: Rational, mu: Rational) -> "P2Map":
        return P2Map(self, as_rat(lam), as_rat(mu))


@dataclass(frozen=True)
class P2Map:
    """f_{λ,μ} at rational parameters with its integral lift D·f."""

    family: P2Family
    lam: Fraction
    mu: Fraction

    @cached_property
    def D(self) -> int:
        """Smallest positive integer making D·λ and D·μ integral."""
        return lcm(self.lam.denominator, self.mu.denominator)

    @property
    def degree(self) -> int:
        return self.family.d

    def apply_lift(self, X: int, Y: int, Z: int) -> Tuple[int, int, int]:
        fam, D = self.family, self.D
        d = fam.d
        z_pow = Z ** (d - 1)
        lam, mu = int(self.lam * D), int(self.mu * D)
        return (D * _eval_form(fam.P, X, Z) + lam * Y * z_pow,
                D * _eval_form(fam.Q, Y, Z) + mu * X * z_pow,
                D * Z ** d)

    def bad_primes(self) -> List[int]:
        """Primes dividing D·c_P·c_Q; off them the lift reduces to a morphism."""
        return sorted(set(prime_factors(self.D * self.family.c_P * self.family.c_Q)))

    def to_json(self) -> Dict:
        return {**self.family.to_json(), "lam": str(self.lam), "mu": str(self.mu)}


def p2_step(fam: P2Family, pt: ProjPointP2, lam: Rational, mu: Rational) -> ProjPointP2:
    """f_{λ,μ}(pt) in canonical form.

    Args:
        fam: Valid family
        pt: Point of P²(Q)
        lam: First parameter
        mu: Second parameter

    Returns:
        The exact image
    """
    return step_map(fam.specialize(lam, mu), pt)


def step_map(f: P2Map, pt: ProjPointP2) -> ProjPointP2:
    image = f.apply_lift(*pt.coords)
    if not any(image):
        raise InvariantViolationError(f"f({pt}) = [0:0:0]; the family is not a morphism")
    return ProjPointP2.of(*image)
