"""Exact rational roots, certified complex roots, algebraic numbers and Mahler heights."""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import mpmath

from algebra.polynomials import UniPoly
from algebra.rationals import ComplexApprox, RealApprox, round_up
from errors import InvalidArgumentError, NumericFailureError

logger = logging.getLogger(__name__)

DEFAULT_TARGET_RADIUS = 1e-12
_START_DPS = 30
_MAX_DPS = 960


def rational_roots(p: UniPoly) -> List[Fraction]:
    """All rational roots of p, with multiplicity, in ascending order.

    Args:
        p: Nonzero polynomial

    Returns:
        Sorted list of roots, each repeated by its multiplicity
    """
    if p.is_zero:
        raise InvalidArgumentError("rational roots of the zero polynomial are undefined")
    if p.degree <= 0:
        return []
    roots: List[Fraction] = []
    _, factors = p.factor_list()
    for factor, multiplicity in factors:
        if factor.degree == 1:
            b, a = factor.coefficients
            roots.extend([-b / a] * multiplicity)
    return sorted(roots)


def _root_radius(coeffs: List) -> mpmath.mpf:
    """max_k |c_{n-k} / c_n|^(1/k); every root has modulus at most twice this (Fujiwara)."""
    n = len(coeffs) - 1
    lead = abs(coeffs[-1])
    radius = max((abs(coeffs[n - k]) / lead) ** (mpmath.mpf(1) / k) for k in range(1, n + 1))
    return radius if radius > 0 else mpmath.mpf(1)


def _initial_guesses(coeffs: List) -> List:
    """Deterministic starting points on a perturbed circle at the root-size scale."""
    n = len(coeffs) - 1
    radius = _root_radius(coeffs)
    return [radius * (1 + mpmath.mpf(k) / (4 * n)) * mpmath.expj(2 * mpmath.pi * k / n + mpmath.mpf("0.4"))
            for k in range(n)]


def _horner(coeffs: List, z):
    acc = coeffs[-1]
    deriv = mpmath.mpf(0)
    for c in reversed(coeffs[:-1]):
        deriv = deriv * z + acc
        acc = acc * z + c
    return acc, deriv


def _aberth_sweep(coeffs: List, zs: List) -> Tuple[List, mpmath.mpf]:
    n = len(zs)
    largest = mpmath.mpf(0)
    out = list(zs)
    for k in range(n):
        value, deriv = _horner(coeffs, out[k])
        if value == 0:
            continue
        newton = value / deriv if deriv != 0 else value
        repulsion = mpmath.fsum(1 / (out[k] - out[j]) for j in range(n) if j != k and out[k] != out[j])
        step = newton / (1 - newton * repulsion)
        out[k] = out[k] - step
        largest = max(largest, abs(step) / max(1, abs(out[k])))
    return out, largest


def _inclusion_radii(coeffs: List, zs: List) -> List:
    """Weierstrass inclusion radii n·|p(z_k)| / |lead·Π(z_k - z_j)| plus evaluation error."""
    n = len(zs)
    lead = coeffs[-1]
    eps = mpmath.mpf(10) ** (-(mpmath.mp.dps - 3))
    radii = []
    for k in range(n):
        value, _ = _horner(coeffs, zs[k])
        size = abs(zs[k])
        slack = eps * mpmath.fsum(abs(c) * size ** i for i, c in enumerate(coeffs))
        denom = abs(lead) * mpmath.fprod(abs(zs[k] - zs[j]) for j in range(n) if j != k)
        if denom == 0:
            radii.append(mpmath.inf)
            continue
        radii.append(n * (abs(value) + slack) / denom)
    return radii


def _disjoint(approxes: List[ComplexApprox]) -> bool:
    for i in range(len(approxes)):
        for j in range(i + 1, len(approxes)):
            gap = abs(approxes[i].to_mpc() - approxes[j].to_mpc())
            if gap <= approxes[i].error_radius + approxes[j].error_radius:
                return False
    return True


def complex_roots(p: UniPoly, target_radius: float = DEFAULT_TARGET_RADIUS,
                  max_sweeps: Optional[int] = None) -> List[ComplexApprox]:
    """Approximate all roots of a squarefree polynomial with certified disks.

    Uses Aberth-Ehrlich simultaneous iteration in mpmath, doubling the working
    precision until every inclusion radius is at most target_radius and the
    disks are pairwise disjoint (so each holds exactly one root).

    Args:
        p: Squarefree polynomial of degree >= 1
        target_radius: Absolute bound on every inclusion radius
        max_sweeps: Iteration cap per precision level

    Returns:
        One ComplexApprox per root, sorted by real then imaginary part
    """
    if p.degree < 1:
        raise InvalidArgumentError("complex roots need degree >= 1")
    if not p.is_squarefree():
        raise InvalidArgumentError("complex_roots needs a squarefree polynomial; divide by gcd(p, p') first")
    n = p.degree
    sweeps = max_sweeps or (100 + 20 * n)
    best: List[float] = []
    zs = None
    dps = _START_DPS
    while dps <= _MAX_DPS:
        with mpmath.workdps(dps):
            coeffs = [mpmath.mpf(c.numerator) / c.denominator for c in p.coefficients]
            zs = _initial_guesses(coeffs) if zs is None else [mpmath.mpc(z) for z in zs]
            tol = mpmath.mpf(10) ** (-(dps - 5))
            for _ in range(sweeps):
                zs, largest = _aberth_sweep(coeffs, zs)
                if largest < tol:
                    break
            radii = _inclusion_radii(coeffs, zs)
            approxes = [ComplexApprox.from_mpc(z, min(r, mpmath.mpf(1e300))) for z, r in zip(zs, radii)]
        best = [a.error_radius for a in approxes]
        within = all(a.error_radius <= target_radius for a in approxes)
        if within and _disjoint(approxes):
            return sorted(approxes, key=lambda a: (a.real, a.imaginary))
        logger.debug("root certification failed at %d digits, retrying", dps)
        dps *= 2
    raise NumericFailureError(f"roots of degree-{n} polynomial not certified to {target_radius}", best)


@dataclass(frozen=True)
class AlgNum:
    """An algebraic number: a defining polynomial plus a disk isolating one root."""

    defining_poly: UniPoly
    isolating_disk: ComplexApprox
    claimed_irreducible: bool = False

    def __post_init__(self):
        p = self.defining_poly
        if p.degree < 1:
            raise InvalidArgumentError("defining polynomial must have degree >= 1")
        content, prim = p.primitive_integer()
        if content != 1 or prim != p:
            raise InvalidArgumentError("defining polynomial must be primitive with integer coefficients")
        if not p.is_squarefree():
            raise InvalidArgumentError("defining polynomial must be squarefree")

    @classmethod
    def from_rational(cls, r: Fraction) -> "AlgNum":
        r = Fraction(r)
        return cls(UniPoly([-r.numerator, r.denominator]),
                   ComplexApprox(float(r), 0.0, round_up(abs(float(r)) * 2.3e-16)), True)

    @property
    def degree(self) -> int:
        return self.defining_poly.degree

    def verify_isolation(self) -> bool:
        """Recompute all roots and check that exactly one lies in the disk."""
        hits = 0
        for root in complex_roots(self.defining_poly):
            gap = abs(root.to_mpc() - self.isolating_disk.to_mpc())
            if gap <= self.isolating_disk.float_radius + root.error_radius:
                hits += 1
        return hits == 1

    def as_rational(self) -> Optional[Fraction]:
        if self.degree != 1:
            return None
        b, a = self.defining_poly.coefficients
        return -b / a

    def to_json(self) -> dict:
        return {"defining_poly": self.defining_poly.to_json(),
                "disk": self.isolating_disk.to_json(),
                "claimed_irreducible": self.claimed_irreducible}

    def __str__(self) -> str:
        z = self.isolating_disk
        return f"root of {self.defining_poly.to_json()} near {z.real:.12g}{z.imaginary:+.12g}i"


def algebraic_roots(p: UniPoly, claimed_irreducible: bool,
                    target_radius: float = DEFAULT_TARGET_RADIUS) -> List[AlgNum]:
    """Wrap every complex root of a primitive squarefree integer polynomial as an AlgNum."""
    return [AlgNum(p, disk, claimed_irreducible) for disk in complex_roots(p, target_radius)]


def _log_plus_interval(disk: ComplexApprox) -> Tuple[float, float]:
    low, high = disk.abs_bounds()
    return max(0.0, math.log(low)) if low > 0 else 0.0, max(0.0, math.log(high)) if high > 0 else 0.0


def _log_mahler_squarefree(p: UniPoly) -> RealApprox:
    if p.degree == 1:
        b, a = p.coefficients
        value = math.log(max(abs(a.numerator * b.denominator), abs(b.numerator * a.denominator))) \
            - math.log(a.denominator * b.denominator)
        return RealApprox(value, round_up(abs(value) * 4e-16))
    total = math.log(abs(p.lead))
    radius = abs(total) * 4e-16
    for disk in complex_roots(p):
        low, high = _log_plus_interval(disk)
        center = max(0.0, math.log(abs(disk))) if abs(disk) > 0 else 0.0
        total += center
        radius += max(high - center, center - low) + abs(center) * 4e-16
    return RealApprox(total, round_up(radius))


def log_mahler_measure(p: UniPoly) -> RealApprox:
    """log M(p) for any nonzero polynomial, through its squarefree decomposition."""
    if p.is_zero:
        raise InvalidArgumentError("Mahler measure of the zero polynomial is undefined")
    if p.degree == 0:
        return RealApprox(math.log(abs(p.lead)), 0.0)
    coeff, parts = p.poly.sqf_list()
    value = math.log(abs(Fraction(str(coeff))))
    radius = abs(value) * 4e-16
    for part, multiplicity in parts:
        piece = _log_mahler_squarefree(UniPoly._wrap(part))
        value += multiplicity * piece.value
        radius += multiplicity * piece.error_radius
    return RealApprox(value, round_up(radius))


def mahler_height(p: UniPoly) -> RealApprox:
    """Weil height of the roots of p via its Mahler measure.

    (1/deg p)·(log|lead(p)| + Σ log⁺|root|), with the root radii propagated.

    Args:
        p: Primitive squarefree integer polynomial of degree >= 1

    Returns:
        The height with its error radius
    """
    if p.degree < 1:
        raise InvalidArgumentError("Mahler height needs degree >= 1")
    content, prim = p.primitive_integer()
    if abs(content) != 1:
        raise InvalidArgumentError("Mahler height needs a primitive integer polynomial")
    if not p.is_squarefree():
        raise InvalidArgumentError("Mahler height needs a squarefree polynomial")
    measure = _log_mahler_squarefree(p)
    n = p.degree
    return RealApprox(measure.value / n, round_up(measure.error_radius / n))
