"""Empirical ratio bounds and uniform-convergence reports for the metric sequence."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from algebra.rationals import ARCH, Place, check_place
from family.iteration import DEFAULT_MAX_DEGREE, IterPair
from family.map_family import MapFamily, StartPoint
from metrics.metric_sequences import MetricLevel, exact_max_valuation, log_max_norm

logger = logging.getLogger(__name__)

REGIONS = ("U", "V")
_DENOMINATORS = 8


def default_radius(fam: MapFamily) -> float:
    """4·(1 + largest coefficient magnitude) of the family."""
    biggest = max((abs(c) for poly in fam.P + fam.Q for c in poly.coefficients), default=Fraction(0))
    return 4.0 * (1.0 + float(biggest))


def sample_parameters(place: Place, region: str, L: float, size: int, seed: int = 0) -> List[Fraction]:
    """Deterministic rational parameters with |λ|_v <= L (region "U") or |λ|_v > L ("V").

    Archimedean samples are p/q with q <= 8; p-adic samples are ±m·p^e with
    p ∤ m, the exponent range chosen to land in the region.
    """
    if region not in REGIONS:
        raise ValueError(f"region must be one of {REGIONS}, got {region!r}")
    rng = np.random.default_rng(seed)
    out: List[Fraction] = []
    if place == ARCH:
        for _ in range(size):
            q = int(rng.integers(1, _DENOMINATORS + 1))
            sign = 1 if rng.random() < 0.5 else -1
            if region == "U":
                out.append(Fraction(int(rng.uniform(-L, L) * q), q))
            else:
                r = L * (1.0 + 9.0 * rng.random())
                out.append(sign * Fraction(math.floor(r * q) + 1, q))
        return out
    p = int(place)
    top = math.floor(math.log(L, p) + 1e-12)
    for _ in range(size):
        m = int(rng.integers(1, 21))
        if m % p == 0:
            m += 1
        sign = 1 if rng.random() < 0.5 else -1
        if region == "U":
            e = int(rng.integers(-top, -top + 4))
        else:
            e = int(rng.integers(-top - 3, -top))
        out.append(sign * m * Fraction(p) ** e)
    return out


def _log_norms(pair: IterPair, lam: Fraction, place: Place, n_max: int) -> List[float]:
    """log M_n(λ) = log max(|A_n(λ)|_v, |B_n(λ)|_v) for n = 0..n_max."""
    values = []
    for n in range(n_max + 1):
        A, B = pair.level(n)
        values.append(log_max_norm(A(lam), B(lam), place))
    return values


@dataclass
class RatioReport:
    """Observed two-sided bounds C₁ M_n^d <= M_{n+1} <= C₂ M_n^d over a parameter sample."""

    place: Place
    region: str
    L: float
    samples: List[Fraction]
    per_level: List[Tuple[int, float, float]] = field(default_factory=list)
    exponents: Optional[List[Tuple[int, int, int]]] = None

    @property
    def C1(self) -> float:
        return min((lo for _, lo, _ in self.per_level), default=math.nan)

    @property
    def C2(self) -> float:
        return max((hi for _, _, hi in self.per_level), default=math.nan)

    def csv_rows(self) -> List[Dict]:
        return [{"n": n, "min_ratio": repr(lo), "max_ratio": repr(hi)} for n, lo, hi in self.per_level]

    def to_json(self) -> Dict:
        out = {
            "place": str(self.place), "region": f"{self.region}_L", "L": self.L,
            "samples": [str(s) for s in self.samples], "C1": self.C1, "C2": self.C2,
            "per_level": [{"n": n, "min": lo, "max": hi} for n, lo, hi in self.per_level],
        }
        if self.exponents is not None:
            out["exponents"] = [{"n": n, "min": lo, "max": hi} for n, lo, hi in self.exponents]
        return out


def ratio_bounds_report(fam: MapFamily, start: StartPoint, place: Place = ARCH, L: Optional[float] = None,
                        sample_size: int = 32, n_max: int = 8, region: str = "U", seed: int = 0,
                        pair: Optional[IterPair] = None) -> RatioReport:
    """Observed min and max of M_{n+1}(λ) / M_n(λ)^d for n < n_max over sampled λ.

    At a prime the ratios are exact powers of p; their exponents are reported
    alongside the float values.

    Args:
        fam: Valid family
        start: Start point, normalized so that deg c > m
        place: "arch" or a prime
        L: Region radius; defaults to default_radius(fam)
        sample_size: Number of parameters
        n_max: Deepest level
        region: "U" for |λ|_v <= L, "V" for |λ|_v > L
        seed: Sampler seed
        pair: Existing iteration cache

    Returns:
        The report
    """
    place = check_place(place)
    L = default_radius(fam) if L is None else L
    pair = pair or IterPair(fam, start, DEFAULT_MAX_DEGREE)
    pair.extend_to(n_max)
    samples = sample_parameters(place, region, L, sample_size, seed)
    d = fam.d
    report = RatioReport(place, region, L, samples, exponents=None if place == ARCH else [])
    logs = [_log_norms(pair, lam, place, n_max) for lam in samples]
    for n in range(n_max):
        ratios = [row[n + 1] - d * row[n] for row in logs]
        report.per_level.append((n, math.exp(min(ratios)), math.exp(max(ratios))))
        if place != ARCH:
            exps = []
            for lam in samples:
                A0, B0 = pair.level(n)
                A1, B1 = pair.level(n + 1)
                # M_{n+1}/M_n^d = p^(d·v_n - v_{n+1})
                exps.append(d * exact_max_valuation(A0(lam), B0(lam), place)
                            - exact_max_valuation(A1(lam), B1(lam), place))
            report.exponents.append((n, min(exps), max(exps)))
    logger.info("ratio bounds on %s_L (L=%g, place %s): C1=%.6g C2=%.6g", region, L, place, report.C1, report.C2)
    return report


@dataclass
class ConvergenceReport:
    """Per-level sup of |log M_{n+1}/d^(n+1) - log M_n/d^n| and the fitted geometric model."""

    place: Place
    degree: int
    sups: List[Tuple[int, float]] = field(default_factory=list)
    burn_in: int = 3

    def _tail(self) -> List[Tuple[int, float]]:
        tail = [(n, s) for n, s in self.sups if n >= self.burn_in]
        return tail or list(self.sups)

    @property
    def C11(self) -> float:
        """Smallest C with sup_n <= C / d^(n+1) past burn-in."""
        return max((s * self.degree ** (n + 1) for n, s in self._tail()), default=0.0)

    @property
    def decay_ratio(self) -> Optional[float]:
        """exp of the least-squares slope of log sup_n past burn-in."""
        points = [(n, s) for n, s in self._tail() if s > 0]
        if len(points) < 2:
            return None
        ns = np.array([n for n, _ in points], dtype=float)
        logs = np.log(np.array([s for _, s in points], dtype=float))
        slope, _ = np.polyfit(ns, logs, 1)
        return float(np.exp(slope))

    @property
    def monotone(self) -> bool:
        tail = [s for _, s in self._tail()]
        return all(b <= a for a, b in zip(tail, tail[1:]))

    def csv_rows(self) -> List[Dict]:
        return [{"n": n, "sup_difference": repr(s)} for n, s in self.sups]

    def to_json(self) -> Dict:
        return {"place": str(self.place), "degree": self.degree, "burn_in": self.burn_in,
                "sups": [{"n": n, "sup": s} for n, s in self.sups], "C11": self.C11,
                "decay_ratio": self.decay_ratio, "monotone_past_burn_in": self.monotone}


def _scaled_logs(pair: IterPair, lam: Fraction, place: Place, n_max: int) -> List:
    """log M_n(λ)/d^n per level: exact Fractions of log p at a prime, floats at arch."""
    d = pair.fam.d
    out = []
    for n in range(n_max + 1):
        if place == ARCH:
            out.append(MetricLevel(pair, n, ARCH).log_scale(lam))
        else:
            A, B = pair.level(n)
            out.append(Fraction(-exact_max_valuation(A(lam), B(lam), place), d ** n))
    return out


def convergence_report(fam: MapFamily, start: StartPoint, place: Place, samples: Sequence[Fraction],
                       n_max: int = 8, burn_in: int = 3, pair: Optional[IterPair] = None) -> ConvergenceReport:
    """Sup over the sample of successive differences of the scaled log metrics.

    At a prime the differences are computed exactly, so levels where the
    metric does not move report exactly 0.
    """
    place = check_place(place)
    report = ConvergenceReport(place, fam.d, burn_in=burn_in)
    if n_max <= 0:
        return report
    pair = pair or IterPair(fam, start, DEFAULT_MAX_DEGREE)
    pair.extend_to(n_max)
    rows = [_scaled_logs(pair, lam, place, n_max) for lam in samples]
    for n in range(n_max):
        if place == ARCH:
            sup = max((abs(row[n + 1] - row[n]) for row in rows), default=0.0)
        else:
            exact = max((abs(row[n + 1] - row[n]) for row in rows), default=Fraction(0))
            sup = float(exact) * math.log(place)
        report.sups.append((n, sup))
        logger.debug("level %d: sup difference %.6g", n, sup)
    return report
