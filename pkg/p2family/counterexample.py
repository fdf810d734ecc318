"""Two start points that share preperiodic parameters without sharing all of them.

For P = X³ - XZ², Q = Y³ and λ = 0 the point c₁ = [0:1:1] is fixed by every
f_{0,μ}, while c₂ = [1:2:1] satisfies f_{0,ζ-8}(c₂) = [0:ζ:1] and then
[0:ζ^(3^(n-1)):1]. At roots of unity ζ both are preperiodic; at μ = 0 only c₁
is. The parameters where both are preperiodic lie on the line λ = 0, which
is not Zariski dense.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from algebra.polynomials import UniPoly
from errors import InvalidArgumentError
from p2family.p2_heights import p2_orbit_detect
from p2family.p2_map import P2Family, ProjPointP2

logger = logging.getLogger(__name__)

SHARED_ORBIT_FAMILY = P2Family([0, -1, 0, 1], [0, 0, 0, 1])
C1 = ProjPointP2(0, 1, 1)
C2 = ProjPointP2(1, 2, 1)
ORBIT_STEPS = 6

# roots of t^k - 1 in Q
_RATIONAL_ROOTS = {1: [1], 2: [1, -1]}

RingPoint = Tuple[UniPoly, UniPoly, UniPoly]


@dataclass
class CounterexampleReport:
    k: int
    y_exponents: List[int] = field(default_factory=list)
    c2_cycle: Optional[Tuple[int, int]] = None
    c1_fixed: bool = False
    first_step_ok: bool = False
    orbit_formula_ok: bool = False
    rational_checks: List[Dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.c1_fixed and self.first_step_ok and self.orbit_formula_ok and all(
            row["agrees"] for row in self.rational_checks)

    def to_json(self) -> Dict:
        return {
            "k": self.k, "passed": self.passed, "c1_fixed": self.c1_fixed, "first_step": self.first_step_ok,
            "orbit_formula": self.orbit_formula_ok, "y_exponents": self.y_exponents,
            "c2_cycle": None if self.c2_cycle is None else {"preperiod": self.c2_cycle[0],
                                                            "period": self.c2_cycle[1]},
            "rational_checks": self.rational_checks,
        }


class _Ring:
    """Z[t]/(t^k - 1)."""

    def __init__(self, k: int):
        self.modulus = UniPoly([-1] + [0] * (k - 1) + [1])

    def __call__(self, x) -> UniPoly:
        if not isinstance(x, UniPoly):
            x = UniPoly.constant(x)
        return x % self.modulus


def _form(coeffs: Sequence[int], x: UniPoly, z: UniPoly) -> UniPoly:
    """Σ c_i x^i z^(d-i)."""
    d = len(coeffs) - 1
    total = UniPoly.constant(0)
    for i, c in enumerate(coeffs):
        if c:
            total = total + (x ** i * z ** (d - i)).scale(c)
    return total


def _step_mod(ring: _Ring, mu: UniPoly, point: RingPoint) -> RingPoint:
    x, y, z = point
    fam = SHARED_ORBIT_FAMILY
    new_x = _form(fam.P, x, z)
    new_y = _form(fam.Q, y, z) + mu * x * z ** (fam.d - 1)
    return ring(new_x), ring(new_y), ring(z ** fam.d)


def p2_counterexample_check(k: int) -> CounterexampleReport:
    """Verify the orbit identities in Z[t]/(t^k - 1) with ζ = t and μ = t - 8.

    Identities that hold in the quotient ring hold at every ζ with ζ^k = 1.
    The orbit formula is checked for the first six steps; the ring orbit of
    c₂ is followed until it closes. Rational ζ (k = 1, 2) are also
    classified exactly on P²(Q).

    Args:
        k: Order of the root of unity, >= 1

    Returns:
        The report
    """
    if k < 1:
        raise InvalidArgumentError("k must be at least 1")
    ring = _Ring(k)
    t = UniPoly.gen()
    mu = ring(t - 8)
    one, zero = ring(1), ring(0)
    report = CounterexampleReport(k)

    report.c1_fixed = _step_mod(ring, mu, (zero, one, one)) == (zero, one, one)
    point = _step_mod(ring, mu, (ring(1), ring(2), one))
    report.first_step_ok = point == (zero, ring(t), one)

    seen: Dict[RingPoint, int] = {}
    formula_ok = report.first_step_ok
    n = 1
    while True:
        if n <= ORBIT_STEPS:
            exponent = pow(3, n - 1, k)
            report.y_exponents.append(exponent)
            formula_ok = formula_ok and point == (zero, ring(t ** exponent), one)
        if report.c2_cycle is None:
            if point in seen:
                # c₂ sits at index 0 and never recurs, so indices count from there
                report.c2_cycle = (seen[point], n - seen[point])
            else:
                seen[point] = n
        if report.c2_cycle is not None and n >= ORBIT_STEPS:
            break
        point = _step_mod(ring, mu, point)
        n += 1
    report.orbit_formula_ok = formula_ok

    parameters = [(0, zeta - 8) for zeta in _RATIONAL_ROOTS.get(k, [])]
    if parameters:
        parameters.append((0, 0))
    for lam, mu_value in parameters:
        r1 = p2_orbit_detect(SHARED_ORBIT_FAMILY, lam, mu_value, C1)
        r2 = p2_orbit_detect(SHARED_ORBIT_FAMILY, lam, mu_value, C2)
        report.rational_checks.append({
            "lam": lam, "mu": str(Fraction(mu_value)), "c1": r1.kind.to_json(), "c2": r2.kind.to_json(),
            "agrees": r1.is_preperiodic and r2.is_preperiodic == (mu_value != 0),
        })
    logger.info("counterexample check k=%d: %s", k, "passed" if report.passed else "FAILED")
    return report
