"""Parameters λ at which the moving start point becomes preperiodic."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from algebra.polynomials import UniPoly
from algebra.roots import DEFAULT_TARGET_RADIUS, AlgNum, algebraic_roots
from dynamics.maps import orbit_detect
from errors import DynamicsError, InvalidArgumentError, InvariantViolationError, NumericFailureError
from family.iteration import IterPair
from family.map_family import MapFamily, StartPoint

logger = logging.getLogger(__name__)


def preperiodic_parameter_poly(pair: IterPair, m: int, n: int) -> UniPoly:
    """A_n B_m - A_m B_n, whose roots are the λ with f_λ^m(c) = f_λ^n(c).

    Args:
        pair: Iteration cache of the family and start point
        m: Smaller level, >= 0
        n: Larger level

    Returns:
        The nonzero polynomial in λ
    """
    if not 0 <= m < n:
        raise InvalidArgumentError(f"need 0 <= m < n, got m={m}, n={n}")
    A_m, B_m = pair.level(m)
    A_n, B_n = pair.level(n)
    poly = A_n * B_m - A_m * B_n
    if poly.is_zero:
        raise InvariantViolationError(f"A_{n}B_{m} - A_{m}B_{n} vanishes identically: c is preperiodic over Q(λ)")
    return poly


@dataclass(frozen=True)
class ParamEntry:
    """One preperiodic parameter: exact when rational, an isolated root otherwise."""

    factor: UniPoly
    relation: Tuple[int, int]
    value: Union[Fraction, AlgNum, None]
    verified: bool
    error: Optional[str] = None

    @property
    def kind(self) -> str:
        return "rational" if isinstance(self.value, Fraction) else "algebraic"

    @property
    def is_rational(self) -> bool:
        return isinstance(self.value, Fraction)

    def lambda_repr(self) -> str:
        if self.value is None:
            return f"root of {self.factor.to_json()}"
        return str(self.value)

    def sort_key(self):
        if isinstance(self.value, Fraction):
            return (0, self.value, 0, ())
        disk = self.value.isolating_disk if self.value is not None else None
        position = (disk.real, disk.imaginary) if disk is not None else ()
        return (1, Fraction(self.factor.degree), tuple(str(c) for c in self.factor.coefficients), position)

    def to_json(self) -> Dict:
        value = self.value.to_json() if isinstance(self.value, AlgNum) else (
            None if self.value is None else str(self.value))
        return {"lambda": self.lambda_repr(), "kind": self.kind, "value": value,
                "factor": self.factor.to_json(), "preperiod_bound": self.relation[0],
                "level": self.relation[1], "verified": self.verified, "error": self.error}


def _strip_known(poly: UniPoly, known: List[UniPoly]) -> UniPoly:
    """Divide out every known irreducible factor as often as it divides."""
    for factor in known:
        while poly.degree > 0 and factor.divides(poly):
            poly = poly.exact_div(factor)
    return poly


def find_preperiodic_params(fam: MapFamily, start: StartPoint, max_pre: int = 2, max_per: int = 2,
                            pair: Optional[IterPair] = None,
                            target_radius: float = DEFAULT_TARGET_RADIUS) -> List[ParamEntry]:
    """All λ with f_λ^m(c) = f_λ^n(c) for m <= max_pre and m < n <= m + max_per.

    Each parameter polynomial is first divided by the irreducible factors
    already found, then factored exactly. Linear factors give rational λ,
    which are re-checked with orbit_detect on the specialized map; higher
    factors give one AlgNum per complex root.

    Args:
        fam: Valid family
        start: Start point
        max_pre: Largest preperiod searched
        max_per: Largest period searched
        pair: Existing iteration cache to reuse
        target_radius: Isolation radius for algebraic roots

    Returns:
        Entries sorted with the rationals first (ascending)
    """
    pair = pair or IterPair(fam, start)
    known: List[UniPoly] = []
    found: List[Tuple[UniPoly, Tuple[int, int]]] = []
    for m in range(max_pre + 1):
        for n in range(m + 1, m + max_per + 1):
            rest = _strip_known(preperiodic_parameter_poly(pair, m, n), known)
            if rest.degree <= 0:
                continue
            _, factors = rest.factor_list()
            for factor, _ in factors:
                if factor not in known:
                    known.append(factor)
                    found.append((factor, (m, n)))
    logger.info("%d distinct irreducible factors up to depth (%d, %d)", len(found), max_pre, max_per)

    entries: List[ParamEntry] = []
    for factor, relation in found:
        if factor.degree == 1:
            entry = _rational_entry(fam, start, factor, relation)
            if entry is not None:
                entries.append(entry)
            continue
        try:
            for alpha in algebraic_roots(factor, claimed_irreducible=True, target_radius=target_radius):
                entries.append(ParamEntry(factor, relation, alpha, False))
        except NumericFailureError as exc:
            logger.warning("roots of %s not isolated: %s", factor.to_json(), exc)
            entries.append(ParamEntry(factor, relation, None, False, str(exc)))
    return sorted(entries, key=ParamEntry.sort_key)


def _rational_entry(fam: MapFamily, start: StartPoint, factor: UniPoly,
                    relation: Tuple[int, int]) -> Optional[ParamEntry]:
    b, a = factor.coefficients
    lam = -b / a
    try:
        result = orbit_detect(fam.specialize(lam), start.value_at(lam))
    except DynamicsError as exc:
        logger.warning("λ = %s could not be re-verified: %s", lam, exc)
        return None
    if not result.is_preperiodic:
        logger.warning("λ = %s is a root of %s but the orbit wanders; dropped", lam, factor.to_json())
        return None
    return ParamEntry(factor, relation, lam, True)
