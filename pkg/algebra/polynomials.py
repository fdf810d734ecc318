"""Polynomials over Q in one and two variables, and binary forms over them.

UniPoly and BiPoly are immutable wrappers around ``sympy.Poly`` over ``QQ``;
the wrapper fixes the generators and exposes coefficients as ``Fraction``.
"""

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import mpmath
from sympy import Poly, QQ, Symbol

from algebra.rationals import as_rat, format_rat
from errors import InvalidArgumentError

_T = Symbol("t")
LAM = Symbol("lam")
MU = Symbol("mu")

Scalar = Union[int, Fraction]


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _to_qq(c: Scalar):
    c = as_rat(c)
    return QQ(c.numerator, c.denominator)


class UniPoly:
    """A univariate polynomial with rational coefficients (ascending in degree)."""

    __slots__ = ("_poly", "_coeffs")

    def __init__(self, coefficients: Iterable[Union[Scalar, str]] = ()):
        """Build from ascending-degree coefficients; trailing zeros are stripped.

        Args:
            coefficients: Coefficients c_0, c_1, ... as ints, "p/q" strings or Fractions
        """
        ascending = [_to_qq(c) for c in coefficients]
        self._poly = Poly.from_list(list(reversed(ascending)) or [QQ(0)], _T, domain=QQ)
        self._coeffs: Optional[Tuple[Fraction, ...]] = None

    @classmethod
    def _wrap(cls, poly: Poly) -> "UniPoly":
        obj = cls.__new__(cls)
        obj._poly = poly if poly.domain == QQ else poly.set_domain(QQ)
        obj._coeffs = None
        return obj

    @classmethod
    def from_sympy(cls, poly: Poly) -> "UniPoly":
        """Wrap a univariate sympy Poly, renaming its generator."""
        return cls._wrap(Poly.from_list(poly.all_coeffs(), _T, domain=QQ))

    @classmethod
    def constant(cls, c: Scalar) -> "UniPoly":
        return cls([c])

    @classmethod
    def gen(cls) -> "UniPoly":
        """The polynomial t (or λ, or x, depending on the caller's reading)."""
        return cls([0, 1])

    @property
    def poly(self) -> Poly:
        return self._poly

    @property
    def coefficients(self) -> Tuple[Fraction, ...]:
        if self._coeffs is None:
            if self._poly.is_zero:
                self._coeffs = ()
            else:
                self._coeffs = tuple(_to_fraction(c) for c in reversed(self._poly.rep.to_list()))
        return self._coeffs

    @property
    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return -1 if self._poly.is_zero else self._poly.degree()

    @property
    def is_zero(self) -> bool:
        return self._poly.is_zero

    @property
    def lead(self) -> Fraction:
        return self.coefficients[-1] if self.coefficients else Fraction(0)

    def __len__(self) -> int:
        return len(self.coefficients)

    # -- ring operations -------------------------------------------------

    def _coerce(self, other) -> Optional["UniPoly"]:
        if isinstance(other, UniPoly):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return UniPoly([other])
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return UniPoly._wrap(self._poly + other._poly)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly._wrap(-self._poly)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return UniPoly._wrap(self._poly - other._poly)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return UniPoly._wrap(self._poly * other._poly)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise InvalidArgumentError("negative power of a polynomial")
        return UniPoly._wrap(self._poly ** n)

    def __divmod__(self, other: "UniPoly"):
        if other.is_zero:
            raise InvalidArgumentError("division by the zero polynomial")
        q, r = self._poly.div(other._poly)
        return UniPoly._wrap(q), UniPoly._wrap(r)

    def __mod__(self, other: "UniPoly"):
        return divmod(self, other)[1]

    def __floordiv__(self, other: "UniPoly"):
        return divmod(self, other)[0]

    def exact_div(self, other: "UniPoly") -> "UniPoly":
        q, r = divmod(self, other)
        if not r.is_zero:
            raise InvalidArgumentError("polynomial division is not exact")
        return q

    def divides(self, other: "UniPoly") -> bool:
        """True when self divides other exactly."""
        return (other % self).is_zero

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self) -> int:
        return hash(self.coefficients)

    def __repr__(self) -> str:
        return f"UniPoly({[format_rat(c) for c in self.coefficients]})"

    # -- evaluation and calculus -----------------------------------------

    def __call__(self, x: Any) -> Any:
        """Evaluate by Horner's rule at any ring element (Fraction, UniPoly, mpmath, ...)."""
        coeffs = self.coefficients
        if not coeffs:
            return Fraction(0) if isinstance(x, (int, Fraction)) else x * 0
        acc = coeffs[-1] if isinstance(x, (int, Fraction, UniPoly, BiPoly)) else _as_real(coeffs[-1], x)
        for c in reversed(coeffs[:-1]):
            acc = acc * x + (c if isinstance(x, (int, Fraction, UniPoly, BiPoly)) else _as_real(c, x))
        return acc

    def derivative(self) -> "UniPoly":
        return UniPoly._wrap(self._poly.diff(_T))

    def compose(self, inner: "UniPoly") -> "UniPoly":
        """self(inner(t))."""
        return UniPoly._wrap(self._poly.compose(inner._poly))

    def monic(self) -> "UniPoly":
        if self.is_zero:
            return self
        return UniPoly._wrap(self._poly.monic())

    def scale(self, c: Scalar) -> "UniPoly":
        return self * UniPoly.constant(c)

    def primitive_integer(self) -> Tuple[Fraction, "UniPoly"]:
        """Split off the rational content.

        Returns:
            (content, q) with self = content * q, q having coprime integer
            coefficients and positive leading coefficient
        """
        if self.is_zero:
            return Fraction(0), self
        coeffs = self.coefficients
        den = reduce(lcm, (c.denominator for c in coeffs), 1)
        ints = [int(c * den) for c in coeffs]
        g = reduce(gcd, ints, 0)
        if ints[-1] < 0:
            g = -g
        return Fraction(g, den), UniPoly([i // g for i in ints])

    def integer_coefficients(self) -> List[int]:
        """Coefficients as ints; raises if some coefficient is not integral."""
        out = []
        for c in self.coefficients:
            if c.denominator != 1:
                raise InvalidArgumentError(f"{self!r} does not have integer coefficients")
            out.append(c.numerator)
        return out

    def is_constant(self) -> bool:
        return self.degree <= 0

    def squarefree_part(self) -> "UniPoly":
        if self.degree <= 0:
            return self
        return UniPoly._wrap(self._poly.quo(self._poly.gcd(self._poly.diff(_T))))

    def is_squarefree(self) -> bool:
        return self.degree <= 0 or self._poly.gcd(self._poly.diff(_T)).degree() == 0

    def factor_list(self) -> Tuple[Fraction, List[Tuple["UniPoly", int]]]:
        """Exact factorization into irreducibles over Q.

        Returns:
            (unit, [(factor, multiplicity), ...]) with primitive integer factors
        """
        unit, factors = self._poly.factor_list()
        out = []
        for f, e in factors:
            _, prim = UniPoly._wrap(f).primitive_integer()
            out.append((prim, e))
        out.sort(key=lambda fe: (fe[0].degree, [str(c) for c in fe[0].coefficients]))
        return as_rat(str(unit)), out

    def max_coefficient_bits(self) -> int:
        """Largest bit length among numerators and denominators."""
        return max((max(c.numerator.bit_length(), c.denominator.bit_length())
                    for c in self.coefficients), default=0)

    def total_coefficient_bits(self) -> int:
        return sum(c.numerator.bit_length() + c.denominator.bit_length() for c in self.coefficients)

    def to_json(self) -> List[str]:
        return [format_rat(c) for c in self.coefficients]

    @classmethod
    def from_json(cls, data: Sequence[Union[str, int]]) -> "UniPoly":
        return cls(data)


def _as_real(c: Fraction, like: Any):
    """Lift a rational coefficient into the numeric type of ``like``."""
    if isinstance(like, (mpmath.mpf, mpmath.mpc)):
        return mpmath.mpf(c.numerator) / c.denominator
    return c.numerator / c.denominator


class BiPoly:
    """A polynomial in (λ, μ) with rational coefficients, stored sparsely."""

    __slots__ = ("_poly", "_terms")

    def __init__(self, terms: Optional[Dict[Tuple[int, int], Union[Scalar, str]]] = None):
        """Build from a map (deg_λ, deg_μ) -> coefficient; zero entries are dropped.

        Args:
            terms: Sparse coefficient map
        """
        clean = {k: _to_qq(v) for k, v in (terms or {}).items() if as_rat(v) != 0}
        self._poly = Poly.from_dict(clean or {(0, 0): QQ(0)}, LAM, MU, domain=QQ)
        self._terms: Optional[Dict[Tuple[int, int], Fraction]] = None

    @classmethod
    def _wrap(cls, poly: Poly) -> "BiPoly":
        obj = cls.__new__(cls)
        obj._poly = poly
        obj._terms = None
        return obj

    @classmethod
    def constant(cls, c: Scalar) -> "BiPoly":
        return cls({(0, 0): c})

    @classmethod
    def lam(cls) -> "BiPoly":
        return cls({(1, 0): 1})

    @classmethod
    def mu(cls) -> "BiPoly":
        return cls({(0, 1): 1})

    @property
    def terms(self) -> Dict[Tuple[int, int], Fraction]:
        if self._terms is None:
            self._terms = {} if self._poly.is_zero else {
                tuple(k): _to_fraction(v) for k, v in self._poly.rep.to_dict().items()}
        return self._terms

    @property
    def is_zero(self) -> bool:
        return self._poly.is_zero

    @property
    def total_degree(self) -> int:
        return -1 if self.is_zero else self._poly.total_degree()

    def homogeneous_part(self, k: int) -> Dict[Tuple[int, int], Fraction]:
        """Terms of total degree exactly k."""
        return {e: c for e, c in self.terms.items() if e[0] + e[1] == k}

    def _coerce(self, other) -> Optional["BiPoly"]:
        if isinstance(other, BiPoly):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return BiPoly.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return BiPoly._wrap(self._poly + other._poly)

    __radd__ = __add__

    def __neg__(self):
        return BiPoly._wrap(-self._poly)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return BiPoly._wrap(self._poly - other._poly)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return BiPoly._wrap(self._poly * other._poly)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        return BiPoly._wrap(self._poly ** n)

    def __eq__(self, other) -> bool:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self) -> str:
        return f"BiPoly({self.to_json()})"

    def evaluate(self, lam: Any, mu: Any) -> Any:
        """Evaluate at (λ, μ); exact when both are rationals."""
        total = Fraction(0) if isinstance(lam, (int, Fraction)) and isinstance(mu, (int, Fraction)) else 0
        for (i, j), c in self.terms.items():
            total = total + _as_scalar(c, lam) * lam ** i * mu ** j
        return total

    def max_coefficient_bits(self) -> int:
        return max((max(c.numerator.bit_length(), c.denominator.bit_length())
                    for c in self.terms.values()), default=0)

    def to_json(self) -> List[list]:
        return [[i, j, format_rat(c)] for (i, j), c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, data: Sequence[Sequence]) -> "BiPoly":
        return cls({(int(i), int(j)): as_rat(c) for i, j, c in data})


def _as_scalar(c: Fraction, like: Any):
    if isinstance(like, (int, Fraction)):
        return c
    return _as_real(c, like)


class BinaryForm:
    """A binary form Σ c_i X^i Y^(deg-i) with coefficients in any ring (Q or Q[λ])."""

    __slots__ = ("coefficients", "degree")

    def __init__(self, coefficients: Sequence[Any], degree: int):
        """Initialize the form.

        Args:
            coefficients: c_0..c_k, coefficient of X^i Y^(degree-i) at index i
            degree: Homogeneous degree; must be at least len(coefficients) - 1
        """
        coefficients = list(coefficients)
        while coefficients and _is_zero(coefficients[-1]):
            coefficients.pop()
        if len(coefficients) - 1 > degree:
            raise InvalidArgumentError("form has more coefficients than its degree allows")
        self.coefficients = tuple(coefficients) + (0,) * (degree + 1 - len(coefficients))
        self.degree = degree

    @classmethod
    def from_affine(cls, poly: Union[UniPoly, Sequence[Any]], degree: int) -> "BinaryForm":
        """Homogenize p(x) = Σ c_i x^i to Y^degree · p(X/Y)."""
        coeffs = poly.coefficients if isinstance(poly, UniPoly) else poly
        return cls(coeffs, degree)

    def evaluate(self, x: Any, y: Any) -> Any:
        """Σ c_i x^i y^(deg-i), computed with incremental powers."""
        x_pows = [x ** 0]
        for _ in range(self.degree):
            x_pows.append(x_pows[-1] * x)
        total = None
        y_pow = y ** 0
        for i in range(self.degree, -1, -1):
            c = self.coefficients[i]
            if not _is_zero(c):
                term = _mul_scalar(c, x_pows[i]) * y_pow
                total = term if total is None else total + term
            if i:
                y_pow = y_pow * y
        if total is None:
            return x * 0
        return total

    def __add__(self, other: "BinaryForm") -> "BinaryForm":
        if other.degree != self.degree:
            raise InvalidArgumentError("cannot add forms of different degrees")
        return BinaryForm([a + b for a, b in zip(self.coefficients, other.coefficients)], self.degree)

    def __mul__(self, other: "BinaryForm") -> "BinaryForm":
        out: List[Any] = [0] * (self.degree + other.degree + 1)
        for i, a in enumerate(self.coefficients):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.coefficients):
                if not _is_zero(b):
                    out[i + j] = out[i + j] + a * b
        return BinaryForm(out, self.degree + other.degree)

    def is_monomial(self, x_power: int, coefficient: Any = 1) -> bool:
        """True when the form equals coefficient * X^x_power * Y^(deg - x_power)."""
        return all((c == coefficient) if i == x_power else _is_zero(c)
                   for i, c in enumerate(self.coefficients))

    def x_degree(self) -> int:
        """Largest i with c_i nonzero."""
        for i in range(self.degree, -1, -1):
            if not _is_zero(self.coefficients[i]):
                return i
        return -1

    def __repr__(self) -> str:
        return f"BinaryForm({list(self.coefficients)!r}, degree={self.degree})"


def _is_zero(c: Any) -> bool:
    if isinstance(c, (UniPoly, BiPoly)):
        return c.is_zero
    return c == 0


def _mul_scalar(c: Any, value: Any) -> Any:
    if isinstance(c, Fraction) and not isinstance(value, (int, Fraction, UniPoly, BiPoly)):
        return _as_real(c, value) * value
    return c * value
