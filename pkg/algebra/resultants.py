"""GCDs, resultants and Bezout certificates for polynomials over Q and Q[λ]."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Any, List, Optional, Sequence

from sympy import Poly, QQ, Rational, Symbol, cancel, fraction, sympify
from sympy.polys.matrices import DomainMatrix

from algebra.polynomials import LAM, BinaryForm, UniPoly
from errors import InvalidArgumentError, NoCertificateError

logger = logging.getLogger(__name__)

_X = Symbol("x")


def poly_gcd(p: UniPoly, q: UniPoly) -> UniPoly:
    """Monic greatest common divisor.

    Args:
        p: First polynomial
        q: Second polynomial

    Returns:
        The monic gcd (the constant 1 for coprime inputs)
    """
    if p.is_zero and q.is_zero:
        raise InvalidArgumentError("gcd of two zero polynomials is undefined")
    return UniPoly._wrap(p.poly.gcd(q.poly)).monic()


def poly_resultant(p: UniPoly, q: UniPoly) -> Fraction:
    """Resultant Res(p, q), computed by sympy's subresultant PRS.

    A constant argument c gives c^(deg of the other argument).
    """
    if p.is_zero or q.is_zero:
        raise InvalidArgumentError("resultant with the zero polynomial is undefined")
    if q.degree == 0:
        return q.lead ** max(p.degree, 0)
    if p.degree == 0:
        return p.lead ** q.degree
    return Fraction(str(p.poly.resultant(q.poly)))


def _to_expr(c: Any):
    if isinstance(c, UniPoly):
        return c.poly.as_expr().subs(c.poly.gen, LAM)
    c = Fraction(c)
    return Rational(c.numerator, c.denominator)


def _from_expr(expr, as_poly: bool):
    num, den = fraction(cancel(expr))
    if den.has(LAM):
        return None
    value = cancel(num / den)
    if as_poly:
        return UniPoly.from_sympy(Poly(value, LAM, domain=QQ))
    return Fraction(str(value))


def resultant_in_x(p: Sequence[Any], q: Sequence[Any]) -> UniPoly:
    """Res_x(p, q) for p, q in Q[λ][x], given as ascending lists of λ-coefficients.

    Args:
        p: Coefficients of x^0, x^1, ... (UniPoly in λ or rationals)
        q: Same for the second polynomial

    Returns:
        The resultant as a polynomial in λ
    """
    def as_poly(coeffs):
        expr = sum(_to_expr(c) * _X ** i for i, c in enumerate(coeffs))
        return Poly(expr, _X, LAM, domain=QQ)

    pp, qq = as_poly(p), as_poly(q)
    if pp.is_zero or qq.is_zero:
        raise InvalidArgumentError("resultant with the zero polynomial is undefined")
    if pp.degree(_X) == 0 or qq.degree(_X) == 0:
        # degree-0 convention, as in poly_resultant
        if qq.degree(_X) == 0:
            return UniPoly.from_sympy(Poly(qq.as_expr() ** max(pp.degree(_X), 0), LAM, domain=QQ))
        return UniPoly.from_sympy(Poly(pp.as_expr() ** qq.degree(_X), LAM, domain=QQ))
    res = pp.resultant(qq)
    return UniPoly.from_sympy(Poly(res.as_expr(), LAM, domain=QQ))


@dataclass(frozen=True)
class BezoutCertificate:
    """Forms with S·P + T·Q = X^t and U·P + V·Q = Y^t, all of degree t - d."""

    S: BinaryForm
    T: BinaryForm
    U: BinaryForm
    V: BinaryForm
    t: int
    scale: int

    def to_json(self) -> dict:
        def enc(form):
            return [c.to_json() if isinstance(c, UniPoly) else str(Fraction(c)) for c in form.coefficients]

        return {"t": self.t, "scale": self.scale,
                "S": enc(self.S), "T": enc(self.T), "U": enc(self.U), "V": enc(self.V)}


def _solve(matrix_rows: List[List[Any]], rhs: List[Any], as_poly: bool) -> Optional[List[Any]]:
    """Solve the exact linear system over Q(λ); None when inconsistent or non-polynomial."""
    ncols = len(matrix_rows[0])
    rows = [[sympify(x) for x in row + [b]] for row, b in zip(matrix_rows, rhs)]
    dm = DomainMatrix.from_list_sympy(len(rows), ncols + 1, rows).to_field()
    reduced, pivots = dm.rref()
    if ncols in pivots:
        return None
    reduced = reduced.to_Matrix()
    solution: List[Any] = [0] * ncols
    for r, c in enumerate(pivots):
        value = _from_expr(reduced[r, ncols], as_poly)
        if value is None:
            return None
        solution[c] = value
    return solution


def _try_degree(P: BinaryForm, Q: BinaryForm, t: int, as_poly: bool):
    d = P.degree
    k = t - d
    # row i collects the coefficient of X^i Y^(t-i)
    p_exprs = [_to_expr(c) for c in P.coefficients]
    q_exprs = [_to_expr(c) for c in Q.coefficients]
    matrix = []
    for i in range(t + 1):
        row = []
        for j in range(k + 1):
            row.append(p_exprs[i - j] if 0 <= i - j <= d else 0)
        for j in range(k + 1):
            row.append(q_exprs[i - j] if 0 <= i - j <= d else 0)
        matrix.append(row)
    zero = 0
    target_x = [zero] * t + [1]
    target_y = [1] + [zero] * t
    st = _solve(matrix, target_x, as_poly)
    if st is None:
        return None
    uv = _solve(matrix, target_y, as_poly)
    if uv is None:
        return None
    return st[:k + 1], st[k + 1:], uv[:k + 1], uv[k + 1:]


def bezout_certificates(P: BinaryForm, Q: BinaryForm, t: Optional[int] = None) -> BezoutCertificate:
    """Find homogeneous S, T, U, V with SP + TQ = X^t and UP + VQ = Y^t.

    The exact linear system in the unknown coefficients is solved at the given
    t (default: the smallest admissible t = d) and t is incremented on failure.
    At t = 2d - 1 the system is the Sylvester system. Over Q it is solvable
    whenever the resultant is nonzero; over Q[λ] it may only be solvable in
    Q(λ). Either way the search stops there.

    Args:
        P: Form of degree d (coefficients rational or in Q[λ])
        Q: Form of the same degree
        t: Starting exponent, at least d

    Returns:
        The certificate at the first feasible t
    """
    if P.degree != Q.degree:
        raise InvalidArgumentError("Bezout certificates need forms of equal degree")
    d = P.degree
    start = d if t is None else t
    if start < d:
        raise InvalidArgumentError(f"t must be at least the degree {d}")
    as_poly = any(isinstance(c, UniPoly) for c in P.coefficients + Q.coefficients)
    for current in range(start, max(start, 2 * d - 1) + 1):
        found = _try_degree(P, Q, current, as_poly)
        if found is None:
            logger.debug("no Bezout certificate at t=%d", current)
            continue
        S, T, U, V = (BinaryForm(part, current - d) for part in found)
        scale = 1
        if not as_poly:
            scale = lcm(*(Fraction(c).denominator for form in (S, T, U, V) for c in form.coefficients))
        return BezoutCertificate(S, T, U, V, current, scale)
    raise NoCertificateError(f"no Bezout certificate up to t = {max(start, 2 * d - 1)}")


def verify_certificate(cert: BezoutCertificate, P: BinaryForm, Q: BinaryForm) -> bool:
    """Exact check of both identities after expansion."""
    left = cert.S * P + cert.T * Q
    right = cert.U * P + cert.V * Q
    return left.is_monomial(cert.t) and right.is_monomial(0)


def form_resultant(P: BinaryForm, Q: BinaryForm) -> Fraction:
    """Resultant of two binary forms of equal degree with rational coefficients.

    Equals the Sylvester determinant of the full coefficient vectors, so it
    also sees a common root at infinity.
    """
    d = P.degree
    if Q.degree != d:
        raise InvalidArgumentError("form resultant needs equal degrees")
    p_desc = [Fraction(c) for c in reversed(P.coefficients)]
    q_desc = [Fraction(c) for c in reversed(Q.coefficients)]
    size = 2 * d
    rows = []
    for i in range(d):
        rows.append([0] * i + p_desc + [0] * (d - 1 - i))
    for i in range(d):
        rows.append([0] * i + q_desc + [0] * (d - 1 - i))
    dm = DomainMatrix([[QQ(c.numerator, c.denominator) if isinstance(c, Fraction) else QQ(c) for c in row]
                       for row in rows], (size, size), QQ)
    det = dm.det()
    return Fraction(int(det.numerator), int(det.denominator))
