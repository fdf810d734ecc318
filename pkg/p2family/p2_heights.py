"""Canonical heights, exact orbit classification and growth-ratio reports for the P² family."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import mpmath

from algebra.rationals import (ARCH, Place, abs_v, as_rat, check_place, int_valuation, log_abs, prime_factors,
                              round_up)
from dynamics.heights import WORK_DPS, HeightResult, levels_needed, truncated_valuation
from dynamics.maps import OrbitResult, Preperiodic, Wandering
from errors import InvalidArgumentError, InvariantViolationError, ResourceLimitError
from metrics.reports import sample_parameters
from p2family.p2_iteration import P2IterPair
from p2family.p2_map import P2Family, P2Map, ProjPointP2, Rational, step_map

logger = logging.getLogger(__name__)

P2PointLike = Union[ProjPointP2, Sequence[Rational]]

_HEIGHT_SLACK = 1e-9


def as_p2_point(pt: P2PointLike) -> ProjPointP2:
    return pt if isinstance(pt, ProjPointP2) else ProjPointP2.from_json(pt)


def _lower_valuation(f: P2Map, p: int) -> int:
    """v_p of the lower bound min(|D|_p ρ_p^d, ρ_p), ρ_p = |D|_p min(|c_P|_p, |c_Q|_p)."""
    fam = f.family
    v_D = int_valuation(f.D, p)
    v_rho = v_D + max(int_valuation(fam.c_P, p), int_valuation(fam.c_Q, p))
    return max(v_D + fam.d * v_rho, v_rho)


def p2_local_bounds(f: P2Map, place: Place) -> Tuple[float, float]:
    """lo <= log‖D·F(x)‖_v <= hi for every x with ‖x‖_v = 1 (max norm)."""
    place = check_place(place)
    if place != ARCH:
        return -_lower_valuation(f, place) * math.log(place), 0.0
    fam = f.family
    spread = max(sum(abs(c) for c in fam.P) + abs(f.lam), sum(abs(c) for c in fam.Q) + abs(f.mu))
    c_min = min(abs(fam.c_P), abs(fam.c_Q))
    rho = min(Fraction(1), Fraction(c_min) / (2 * spread))
    lower = f.D * min(rho ** fam.d, Fraction(c_min, 2))
    upper = f.D * max(spread, Fraction(1))
    return log_abs(lower, ARCH), log_abs(upper, ARCH)


def _arch_local(f: P2Map, pt: ProjPointP2, tol: float) -> Tuple[float, float]:
    lower, upper = p2_local_bounds(f, ARCH)
    spread = max(abs(lower), abs(upper))
    d = f.degree
    levels = levels_needed(spread, d, tol)
    with mpmath.workdps(WORK_DPS):
        coords = [mpmath.mpf(c) for c in pt.coords]
        size = max(abs(c) for c in coords)
        total = mpmath.log(size) - (mpmath.log(abs(coords[2])) if pt.Z else 0)
        coords = [c / size for c in coords]
        scale = mpmath.mpf(1)
        for _ in range(levels):
            scale *= d
            image = f.apply_lift(*coords)
            norm = max(abs(c) for c in image)
            total += mpmath.log(norm) / scale
            coords = [c / norm for c in image]
        value = float(total)
    rounding = (levels + 1) * 10.0 ** (-(WORK_DPS - 8)) + abs(value) * 2.3e-16
    tail = spread / (d ** levels * (d - 1)) if spread > 0 else 0.0
    return value, round_up(tail + rounding)


def _padic_local(f: P2Map, pt: ProjPointP2, p: int, tol: float) -> Tuple[float, float]:
    start = Fraction(int_valuation(pt.Z, p)) if pt.Z else Fraction(0)
    slack = _lower_valuation(f, p)
    if slack == 0:
        return float(start) * math.log(p), 0.0
    d = f.degree
    spread = slack * math.log(p)
    levels = levels_needed(spread, d, tol)
    precision = (slack + 1) * (levels + 1) + 1
    coords = [c % p ** precision for c in pt.coords]
    exponent = start
    for k in range(levels):
        modulus = p ** precision
        image = [c % modulus for c in f.apply_lift(*coords)]
        drop = min(truncated_valuation(c, p, precision) for c in image)
        if drop > slack:
            raise InvariantViolationError(f"p-adic drop {drop} exceeds the bound {slack} at p={p}")
        exponent -= Fraction(drop, d ** (k + 1))
        precision -= drop
        coords = [(c // p ** drop) % p ** precision for c in image]
    tail = spread / (d ** levels * (d - 1))
    return float(exponent) * math.log(p), round_up(tail + abs(float(exponent)) * math.log(p) * 2.3e-16)


def p2_height_places(f: P2Map, pt: ProjPointP2) -> List[Place]:
    primes = set(f.bad_primes())
    if pt.Z:
        primes.update(prime_factors(pt.Z))
    return [ARCH] + sorted(primes)


def p2_canonical_height(fam: P2Family, lam: Rational, mu: Rational, pt: P2PointLike,
                        tol: float = 1e-9) -> HeightResult:
    """ĥ_{f_{λ,μ}}(pt) as a sum of local canonical heights.

    Local heights are taken relative to the affine chart Z = 1, so a good
    prime contributes v_p(Z)·log p and only the archimedean place and the
    primes dividing D·c_P·c_Q are iterated.

    Args:
        fam: Valid family
        lam: First parameter
        mu: Second parameter
        pt: Point of P²(Q), or its coordinates
        tol: Absolute tolerance for the total

    Returns:
        HeightResult with the per-place breakdown
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    f = fam.specialize(lam, mu)
    pt = as_p2_point(pt)
    bad = set(f.bad_primes())
    places = p2_height_places(f, pt)
    share = tol / len(places)
    breakdown = []
    radius = 0.0
    for place in places:
        if place == ARCH:
            local, local_radius = _arch_local(f, pt, share)
        elif place in bad:
            local, local_radius = _padic_local(f, pt, place, share)
        else:
            local, local_radius = int_valuation(pt.Z, place) * math.log(place), 0.0
        breakdown.append((place, local))
        radius += local_radius
    value = math.fsum(local for _, local in breakdown)
    radius = round_up(radius + len(places) * abs(value) * 2.3e-16)
    logger.debug("ĥ(%s) = %.12g ± %.3g at (λ, μ) = (%s, %s)", pt, value, radius, f.lam, f.mu)
    return HeightResult(value, radius, tuple(breakdown))


def p2_parameter_height(fam: P2Family, lam: Rational, mu: Rational, a: Rational, b: Rational,
                        tol: float = 1e-9) -> float:
    """d·ĥ_{f_{λ,μ}}([a:b:1]), the height of [λ:μ:1] for the limit metric of the start point."""
    return fam.d * p2_canonical_height(fam, lam, mu, (a, b, 1), tol / fam.d).value


def p2_height_box_constant(f: P2Map) -> float:
    """C₀ with |h(f(x)) - d·h(x)| <= C₀ on P²(Q)."""
    arch_lower, arch_upper = p2_local_bounds(f, ARCH)
    lower_total = arch_lower + sum(p2_local_bounds(f, p)[0] for p in f.bad_primes())
    value = max(0.0, arch_upper, -lower_total)
    return round_up(value) if value > 0 else 0.0


def p2_orbit_detect(fam: P2Family, lam: Rational, mu: Rational, pt: P2PointLike,
                    max_steps: Optional[int] = None) -> OrbitResult:
    """Exact preperiodicity test on P²(Q) by the height box C₀/(d-1) and cycle detection."""
    f = fam.specialize(lam, mu)
    bound = p2_height_box_constant(f) / (f.degree - 1)
    seen: Dict[ProjPointP2, int] = {}
    orbit: List[ProjPointP2] = []
    current = as_p2_point(pt)
    index = 0
    while True:
        if current in seen:
            first = seen[current]
            return OrbitResult(Preperiodic(first, index - first), tuple(orbit))
        if current.weil_height() > bound + _HEIGHT_SLACK:
            orbit.append(current)
            logger.debug("P² orbit leaves the height box %.6g at step %d", bound, index)
            return OrbitResult(Wandering(index, bound), tuple(orbit))
        if max_steps is not None and index >= max_steps:
            raise ResourceLimitError(f"orbit not classified within {max_steps} steps", tuple(orbit))
        seen[current] = index
        orbit.append(current)
        current = step_map(f, current)
        index += 1


@dataclass(frozen=True)
class GrowthConstants:
    """δ, L₆ and C₁₅ with min(|P(z)|, |Q(z)|) >= δ|z|^d for |z| >= L₆ and max(|P(z)|, |Q(z)|) <= C₁₅ max(1, |z|)^d.

    At the archimedean place `candidates` lists every (L₆, δ) pair that was
    evaluated; the chosen pair is one of them.
    """

    delta: float
    L6: float
    C15: float
    candidates: Tuple[Tuple[float, float], ...] = ()

    def to_json(self) -> Dict:
        return {"delta": self.delta, "L6": self.L6, "C15": self.C15,
                "candidates": [{"L6": r, "delta": dl} for r, dl in self.candidates]}


def _float_down(x: Fraction) -> float:
    f = float(x)
    return f if Fraction(f) <= x else math.nextafter(f, 0.0)


def _float_up(x: Fraction) -> float:
    f = float(x)
    return f if Fraction(f) >= x else round_up(f)


def delta_at(coeffs: Sequence[int], r: Fraction) -> Fraction:
    """|c_d| - Σ_{i<d} |c_i| r^(i-d), a lower bound for |F(z, 1)|/|z|^d on |z| >= r."""
    d = len(coeffs) - 1
    return abs(Fraction(coeffs[-1])) - sum((abs(c) * Fraction(r) ** (i - d) for i, c in enumerate(coeffs[:-1])),
                                           Fraction(0))


def radius_candidates(fam: P2Family) -> List[Fraction]:
    """Radii read off the coefficients (never below 2); the largest is 2·Σ|low|/|lead| or 2."""
    out = {Fraction(2)}
    for coeffs in (fam.P, fam.Q):
        lead, low = abs(coeffs[-1]), [abs(c) for c in coeffs[:-1]]
        out.add(Fraction(2 * sum(low), lead))
        out.add(1 + Fraction(max(low, default=0), lead))
    return sorted(r for r in out if r >= 2)


def growth_constants(fam: P2Family, place: Place, a: Optional[Rational] = None,
                     b: Optional[Rational] = None) -> GrowthConstants:
    """Growth constants of the family at one place.

    At the archimedean place δ is evaluated exactly at every candidate L₆.
    With a start (a, b) the pair giving the smallest L* is kept (ties go to
    the larger δ); without one the largest candidate is used. C₁₅ is the
    coefficient sum.
    """
    place = check_place(place)
    if place != ARCH:
        v = max(int_valuation(fam.c_P, place), int_valuation(fam.c_Q, place))
        return GrowthConstants(delta=float(place) ** -v, L6=float(place) ** (v + 1), C15=1.0)
    C15 = float(max(sum(abs(c) for c in fam.P), sum(abs(c) for c in fam.Q)))
    fitted = []
    for r in radius_candidates(fam):
        delta = min(delta_at(fam.P, r), delta_at(fam.Q, r))
        if delta > 0:
            fitted.append((_float_up(r), _float_down(delta)))
    candidates = tuple(fitted)
    options = [GrowthConstants(delta, r, C15, candidates) for r, delta in fitted]
    if a is None or b is None:
        return options[-1]
    a, b = as_rat(a), as_rat(b)
    return min(options, key=lambda g: (outer_radius(fam, a, b, ARCH, g), -g.delta))


def outer_radius(fam: P2Family, a: Fraction, b: Fraction, place: Place, growth: GrowthConstants) -> float:
    """L* beyond which M_{n+1} >= (δ/2)·M_n^d holds for every n >= 1."""
    d, delta, L6 = fam.d, growth.delta, growth.L6
    abs_a, abs_b = abs_v(a, place), abs_v(b, place)
    return max(1.0,
               2 * abs_v(Fraction(fam.Q_affine(b)), place) / abs_a,
               2 * abs_v(Fraction(fam.P_affine(a)), place) / abs_b,
               2 * L6 / min(abs_a, abs_b),
               delta * L6 ** (d - 1) / 2,
               2 ** d / (delta * abs_a ** (d - 1)),
               2 ** d / (delta * abs_b ** (d - 1)))


def _log_M(pair: P2IterPair, n: int, lam: Fraction, mu: Fraction, place: Place) -> float:
    """log max(|A_n|_v, |B_n|_v, 1)."""
    A, B = pair.evaluate(n, lam, mu)
    return max(log_abs(A, place), log_abs(B, place), 0.0)


@dataclass
class P2RatioReport:
    """Observed M_{n+1}/M_n^d inside and outside the ball, next to the bounds the growth constants give."""

    place: Place
    L: float
    L_star: float
    growth: GrowthConstants
    C16: float
    C17: float
    inside: List[Tuple[int, float, float]] = field(default_factory=list)
    outside: List[Tuple[int, float, float]] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def csv_rows(self) -> List[Dict]:
        rows = []
        for region, levels in (("inside", self.inside), ("outside", self.outside)):
            rows.extend({"region": region, "n": n, "min_ratio": repr(lo), "max_ratio": repr(hi)}
                        for n, lo, hi in levels)
        return rows

    def to_json(self) -> Dict:
        return {
            "place": str(self.place), "L": self.L, "L_star": self.L_star, **self.growth.to_json(),
            "C16": self.C16, "C17": self.C17,
            "inside": [{"n": n, "min": lo, "max": hi} for n, lo, hi in self.inside],
            "outside": [{"n": n, "min": lo, "max": hi} for n, lo, hi in self.outside],
            "violations": self.violations,
            "note": "finite samples only; Zariski density of parameter sets is not verifiable here",
        }


def _observe(pair: P2IterPair, samples: List[Tuple[Fraction, Fraction]], place: Place,
             n_max: int) -> Dict[Tuple[Fraction, Fraction], List[float]]:
    return {s: [_log_M(pair, n, s[0], s[1], place) for n in range(n_max + 1)] for s in samples}


def p2_ratio_report(fam: P2Family, a: Rational, b: Rational, place: Place = ARCH, L: float = 2.0,
                    sample_size: int = 16, n_max: int = 5, seed: int = 0,
                    pair: Optional[P2IterPair] = None) -> P2RatioReport:
    """Sample (λ, μ) inside max(|λ|_v, |μ|_v) <= L and beyond L*, and compare M_{n+1}/M_n^d with its bounds.

    Inside the ball the ratios must lie in [C₁₆, C₁₇]; beyond L* they must lie
    in [δ/2, C₁₅ + δ/2] and M_n^(d-1) >= 2 max(|λ|_v, |μ|_v)/δ for n >= 1.
    Failures are listed in the report.

    Args:
        fam: Valid family
        a: First start coordinate, nonzero
        b: Second start coordinate, nonzero
        place: "arch" or a prime
        L: Radius of the inner ball, > 1
        sample_size: Samples per region
        n_max: Deepest level
        seed: Sampler seed
        pair: Existing iteration cache

    Returns:
        The report
    """
    place = check_place(place)
    if not L > 1:
        raise InvalidArgumentError("L must exceed 1")
    pair = pair or P2IterPair(fam, a, b)
    pair.extend_to(n_max)
    d = fam.d
    growth = growth_constants(fam, place, pair.a, pair.b)
    L_star = outer_radius(fam, pair.a, pair.b, place, growth)
    L7 = max(growth.L6, (2 * L / growth.delta) ** (1 / (d - 1)) * (1 + 1e-9))
    report = P2RatioReport(place, L, L_star, growth, C16=min(L7 ** -d, growth.delta / 2), C17=growth.C15 + L)

    inner = list(zip(sample_parameters(place, "U", L, sample_size, seed),
                     sample_parameters(place, "U", L, sample_size, seed + 1)))
    big = sample_parameters(place, "V", L_star, sample_size, seed + 2)
    small = sample_parameters(place, "U", L_star, sample_size, seed + 3)
    outer = [(x, y) if i % 2 == 0 else (y, x) for i, (x, y) in enumerate(zip(big, small))]

    inside_logs = _observe(pair, inner, place, n_max)
    outside_logs = _observe(pair, outer, place, n_max)
    lo_in, hi_in = math.log(report.C16), math.log(report.C17)
    lo_out, hi_out = math.log(growth.delta / 2), math.log(growth.C15 + growth.delta / 2)
    for n in range(1, n_max):
        for logs, levels, lo, hi, name in ((inside_logs, report.inside, lo_in, hi_in, "inside"),
                                           (outside_logs, report.outside, lo_out, hi_out, "outside")):
            if not logs:
                continue
            ratios = {s: row[n + 1] - d * row[n] for s, row in logs.items()}
            levels.append((n, math.exp(min(ratios.values())), math.exp(max(ratios.values()))))
            for (lam, mu), r in ratios.items():
                if r < lo - _HEIGHT_SLACK or r > hi + _HEIGHT_SLACK:
                    report.violations.append(f"{name} ({lam}, {mu}), n={n}: log ratio {r:.6g} not in [{lo:.6g}, {hi:.6g}]")
    for (lam, mu), row in outside_logs.items():
        big_abs = max(log_abs(lam, place), log_abs(mu, place))
        need = math.log(2 / growth.delta) + big_abs
        for n in range(1, n_max + 1):
            if (d - 1) * row[n] < need - _HEIGHT_SLACK:
                report.violations.append(f"growth bound fails at ({lam}, {mu}), n={n}")
    logger.info("P² ratio report at %s: L*=%.6g, %d violations", place, L_star, len(report.violations))
    return report
