"""Function-field canonical height of the start point and its specializations.

The specialization law compares ĥ_{f_λ}(c(λ)) with ĥ_f(c)·h(λ); their
difference stays bounded when deg c > m.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dynamics.heights import DEFAULT_TOL, canonical_height, weil_height
from dynamics.maps import homogeneous_step
from errors import (DegreeStagnationError, InvalidArgumentError, InvariantViolationError,
                    UndefinedRatioError)
from family.iteration import DEFAULT_MAX_DEGREE, IterPair, normalize_start
from family.map_family import MapFamily, StartPoint

logger = logging.getLogger(__name__)

STABLE_RUN = 3


def ff_canonical_height(fam: MapFamily, start: StartPoint, cap: int = 8,
                        max_degree: int = DEFAULT_MAX_DEGREE) -> Fraction:
    """ĥ_f(c) over Q(λ) as the exact limit of e_n/d^n, e_n = max(deg A_n, deg B_n).

    The start is first pushed forward k steps until deg f^k(c) > m; the ratio
    is declared stable once three consecutive levels agree, and is divided
    by d^k.

    Args:
        fam: Valid family
        start: Start point
        cap: Normalization search depth
        max_degree: Degree cap for the iteration

    Returns:
        The exact rational height

    Raises:
        DegreeStagnationError: when no iterate clears m within cap
    """
    k, normalized = normalize_start(fam, start, cap)
    pair = IterPair(fam, normalized, max_degree)
    d = fam.d
    run: List[Fraction] = []
    n = 0
    while True:
        A, B = pair.level(n)
        ratio = Fraction(max(A.degree, B.degree), d ** n)
        run = run[-(STABLE_RUN - 1):] + [ratio]
        if len(run) == STABLE_RUN and len(set(run)) == 1:
            break
        n += 1
    value = run[-1] / d ** k
    logger.info("function-field height %s (shift %d, stable at level %d)", value, k, n)
    return value


@dataclass(frozen=True)
class SpecializationRow:
    lam: Fraction
    hhat: float
    weil: float
    error: float
    ratio: Optional[float]

    def row(self) -> Dict:
        return {"lambda": str(self.lam), "hhat": repr(self.hhat), "weil_height": repr(self.weil),
                "error": repr(self.error), "ratio": "" if self.ratio is None else repr(self.ratio)}


SPECIALIZATION_COLUMNS = ["lambda", "hhat", "weil_height", "error", "ratio"]


def height_windows(max_height: float) -> List[Tuple[float, float]]:
    """Doubling windows [0,1), [1,2), [2,4), ... covering [0, max_height]."""
    windows = [(0.0, 1.0)]
    while windows[-1][1] <= max_height:
        lo, hi = windows[-1]
        windows.append((hi, 2 * hi))
    return windows


def mann_kendall(values: Sequence[float]) -> int:
    """S = Σ_{i<j} sign(x_j - x_i); negative means a decreasing trend."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        return 0
    diffs = x[None, :] - x[:, None]
    return int(np.sign(np.triu(diffs, k=1)).sum())


@dataclass
class SpecializationReport:
    """Per-λ errors |ĥ_{f_λ}(c(λ)) - ĥ_f(c)h(λ)| with their sup and trend over height windows."""

    hhat_generic: Fraction
    rows: List[SpecializationRow] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    @property
    def sup_error(self) -> float:
        return max((r.error for r in self.rows), default=0.0)

    def window_maxima(self) -> List[Tuple[Tuple[float, float], float]]:
        if not self.rows:
            return []
        out = []
        for lo, hi in height_windows(max(r.weil for r in self.rows)):
            errors = [r.error for r in self.rows if lo <= r.weil < hi]
            if errors:
                out.append(((lo, hi), max(errors)))
        return out

    @property
    def trend(self) -> int:
        return mann_kendall([m for _, m in self.window_maxima()])

    @property
    def tail_ratio(self) -> Optional[float]:
        """Mean ĥ/(ĥ_f(c)h) over the highest quarter of the sample."""
        ranked = sorted((r for r in self.rows if r.ratio is not None), key=lambda r: r.weil)
        if not ranked:
            return None
        tail = ranked[-max(1, len(ranked) // 4):]
        return float(np.mean([r.ratio for r in tail]))

    def to_json(self) -> Dict:
        return {
            "hhat_generic": str(self.hhat_generic),
            "sup_error": self.sup_error,
            "trend_statistic": self.trend,
            "tail_ratio": self.tail_ratio,
            "windows": [{"window": list(w), "max_error": m} for w, m in self.window_maxima()],
            "rows": [r.row() for r in self.rows],
            "skipped": self.skipped,
        }


def specialized_height(fam: MapFamily, start: StartPoint, lam: Fraction, tol: float = DEFAULT_TOL) -> float:
    return canonical_height(fam.specialize(lam), start.value_at(lam), tol).value


def specialization_check(fam: MapFamily, start: StartPoint, samples: Sequence[Fraction],
                         tol: float = DEFAULT_TOL, hhat_generic: Optional[Fraction] = None) -> SpecializationReport:
    """Compare ĥ_{f_λ}(c(λ)) with ĥ_f(c)·h(λ) at each rational λ.

    Parameters where the specialization is not a valid map or c(λ) is
    undefined are skipped with the reason.

    Args:
        fam: Valid family
        start: Start point
        samples: Rational parameters
        tol: Tolerance for each specialized canonical height
        hhat_generic: ĥ_f(c), computed when omitted

    Returns:
        The report
    """
    if hhat_generic is None:
        try:
            hhat_generic = ff_canonical_height(fam, start)
        except DegreeStagnationError:
            logger.warning("deg f^k(c) never clears m; comparing against ĥ_f(c) = 0")
            hhat_generic = Fraction(0)
    report = SpecializationReport(hhat_generic)
    for lam in samples:
        lam = Fraction(lam)
        try:
            hhat = specialized_height(fam, start, lam, tol)
        except (InvalidArgumentError, InvariantViolationError) as exc:
            report.skipped.append(f"{lam}: {exc}")
            continue
        h = weil_height(lam)
        expected = float(hhat_generic) * h
        ratio = hhat / expected if expected > 0 else None
        report.rows.append(SpecializationRow(lam, hhat, h, abs(hhat - expected), ratio))
    logger.info("specialization check: %d rows, sup error %.6g, trend %d", len(report.rows),
                report.sup_error, report.trend)
    return report


def height_ratio_invariance(fam: MapFamily, start: StartPoint, lam: Fraction, k: int,
                            tol: float = DEFAULT_TOL) -> Tuple[float, float]:
    """(ĥ_{f_λ}(c(λ))/ĥ_f(c), ĥ_{f_λ}(f_λ^k(c(λ)))/ĥ_f(f^k(c))).

    Both heights scale by d^k along the orbit, so the two ratios agree up to
    the height tolerances.

    Raises:
        UndefinedRatioError: when ĥ_f(c) = 0
    """
    if k < 0:
        raise InvalidArgumentError("k must be nonnegative")
    lam = Fraction(lam)
    try:
        generic = ff_canonical_height(fam, start)
    except DegreeStagnationError as exc:
        raise UndefinedRatioError(f"ĥ_f(c) = 0: {exc}") from exc
    if generic == 0:
        raise UndefinedRatioError("ĥ_f(c) = 0")
    f = fam.specialize(lam)
    pt = start.value_at(lam)
    first = canonical_height(f, pt, tol).value / float(generic)
    if k == 0:
        return first, first
    for _ in range(k):
        pt = homogeneous_step(f, pt)
    shifted = canonical_height(f, pt, tol).value / float(generic * fam.d ** k)
    return first, shifted
