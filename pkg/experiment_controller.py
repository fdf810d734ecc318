import logging
from argparse import Namespace
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from algebra.rationals import ARCH, as_rat, format_rat
from algebra.roots import algebraic_roots
from database.models import DatabaseManager
from dynamics.heights import canonical_height, canonical_height_alg
from dynamics.maps import orbit_detect
from errors import ConfigError, DynamicsError, HypothesisNotMetError, UndefinedRatioError
from family.experiments import CORRELATION_COLUMNS, correlation_experiment, pcf_experiment, status_name
from family.iteration import IterPair, check_degree_law, normalize_start
from family.map_family import validate_family
from family.parameters import find_preperiodic_params
from metrics.metric_sequences import metric_eval
from metrics.reports import convergence_report, default_radius, ratio_bounds_report, sample_parameters
from metrics.specialization import SPECIALIZATION_COLUMNS, height_ratio_invariance, specialization_check
from p2family.counterexample import p2_counterexample_check
from p2family.p2_heights import p2_canonical_height, p2_orbit_detect, p2_parameter_height, p2_ratio_report
from p2family.p2_iteration import P2IterPair, p2_iterate_symbolic, p2_theta_check
from p2family.p2_map import ProjPointP2, p2_step
from templates.messages import MessageTemplates
from utils.plotting import compute_plot_grid, emit_plot
from utils.reporting import map_ordered, write_csv, write_json
from utils.spec_parser import (default_samples, family_from_spec, map_from_spec, p2_family_from_spec, parse_p2_point,
                               parse_point, parse_poly, parse_samples)
from utils.validators import ExperimentConfig

logger = logging.getLogger(__name__)

PROGRAM = "arithdyn"

PARAM_COLUMNS = ["lambda", "kind", "value", "preperiod_bound", "level", "verified", "error"]
RATIO_COLUMNS = ["n", "min_ratio", "max_ratio"]
CONVERGENCE_COLUMNS = ["n", "sup_difference"]
ALG_HEIGHT_COLUMNS = ["alpha", "factor", "value", "error_radius", "certified"]


@dataclass
class Outcome:
    """What a subcommand produced: a printable line, a JSON summary and rows for the store."""

    message: str
    summary: Dict[str, Any]
    rows: List[Dict[str, Any]] = field(default_factory=list)
    artifacts: List[Path] = field(default_factory=list)
    exit_code: int = 0


class ExperimentController:
    def __init__(self, config: ExperimentConfig, db_path: Optional[str] = None):
        """Initialize the controller for one validated config.

        Args:
            config: Validated configuration, flags already applied
            db_path: SQLAlchemy URL; no store is used when omitted
        """
        self.config = config
        self.bounds = config.bounds
        self.out = Path(config.out)
        self.messages = MessageTemplates(PROGRAM)
        self.db_manager = DatabaseManager(db_path) if db_path else None

        self._handlers: Dict[str, Callable[[Namespace], Outcome]] = {
            "validate": self._validate,
            "orbit": self._orbit,
            "height": self._height,
            "family-iterate": self._family_iterate,
            "find-params": self._find_params,
            "correlate": self._correlate,
            "pcf": self._pcf,
            "metrics-report": self._metrics_report,
            "specialize": self._specialize,
            "p2": self._p2,
            "plot": self._plot,
        }

    @property
    def commands(self) -> List[str]:
        return list(self._handlers)

    def run(self, command: str, args: Namespace) -> Outcome:
        """Dispatch a subcommand, write its artifacts and, if enabled, store the run.

        Args:
            command: Subcommand name
            args: Parsed flags

        Returns:
            The outcome; domain failures propagate as DynamicsError
        """
        if command not in self._handlers:
            raise ConfigError(f"unknown command {command!r}")
        logger.info(self.messages.banner(command, self.config.seed, self.config.threads, str(self.out)))
        outcome = self._handlers[command](args)
        if self.db_manager is not None:
            name = command if command != "p2" else f"p2-{args.p2_command}"
            run_id = self.db_manager.create_run(name, self.config.model_dump(mode="json"), self.config.seed,
                                                outcome.summary)
            self.db_manager.store_rows(run_id, outcome.rows)
            outcome.summary["run_id"] = run_id
        return outcome

    def write_failure(self, command: str, exc: DynamicsError) -> Path:
        """Record a failed run, with any partial result, next to the other artifacts."""
        payload = {"command": command, "error": type(exc).__name__, "message": str(exc),
                   "exit_code": exc.exit_code}
        partial = getattr(exc, "partial", None)
        if partial is not None:
            payload["partial"] = _partial_json(partial)
            payload["note"] = self.messages.RESOURCE_NOTE
        return write_json(self.out / f"{command}.error.json", payload)

    # -- helpers ---------------------------------------------------------

    def _family(self, name: str = "family"):
        return family_from_spec(getattr(self.config, name), name)

    def _pair(self, fam, start) -> IterPair:
        return IterPair(fam, start, self.bounds.max_degree, self.bounds.max_bits)

    def _point(self, args: Namespace):
        value = args.point if getattr(args, "point", None) is not None else self.config.point
        if value is None:
            raise ConfigError("a point is required (--point or 'point' in the config)")
        return parse_point(value)

    def _lam(self, args: Namespace) -> Optional[Fraction]:
        value = getattr(args, "lam", None)
        if value is None:
            value = self.config.lam
        return None if value is None else as_rat(value)

    def _place(self, args: Namespace):
        value = getattr(args, "place", None) or self.config.place
        return value if value == ARCH else int(value)

    def _json(self, name: str, data: Any) -> Path:
        return write_json(self.out / f"{name}.json", data)

    def _csv(self, name: str, columns: List[str], rows: List[Dict]) -> Path:
        return write_csv(self.out / f"{name}.csv", columns, rows)

    # -- P¹ families -----------------------------------------------------

    def _validate(self, args: Namespace) -> Outcome:
        fam, _ = self._family()
        report = validate_family(fam)
        path = self._json("validate", {"family": fam.to_json(), **report.to_json()})
        if report.passed:
            message = self.messages.summary("validate", verdict="valid", detail="all hypotheses hold")
        else:
            detail = "; ".join(f"{c.name}: {c.detail}" for c in report.failures)
            message = self.messages.summary("validate", verdict="INVALID", detail=detail)
        return Outcome(message, report.to_json(), artifacts=[path], exit_code=0 if report.passed else 1)

    def _orbit(self, args: Namespace) -> Outcome:
        f = map_from_spec(self.config.map)
        point = self._point(args)
        result = orbit_detect(f, point, getattr(args, "max_steps", None))
        summary = {"map": f.to_json(), "point": point.to_json(), **result.to_json()}
        path = self._json("orbit", summary)
        if result.is_preperiodic:
            kind, detail = "preperiodic", f" (preperiod {result.kind.preperiod}, period {result.kind.period})"
        else:
            kind, detail = "wandering", ""
        return Outcome(self.messages.summary("orbit", point=point, kind=kind, detail=detail), summary,
                       artifacts=[path])

    def _height(self, args: Namespace) -> Outcome:
        f = map_from_spec(self.config.map)
        if self.config.minpoly is not None:
            return self._height_alg(f)
        point = self._point(args)
        result = canonical_height(f, point, self.bounds.tol)
        summary = {"map": f.to_json(), "point": point.to_json(), **result.to_json()}
        path = self._json("height", summary)
        message = self.messages.summary("height", point=point, value=result.value, radius=result.error_radius,
                                        certified="certified" if result.certified else "not certified")
        return Outcome(message, summary, artifacts=[path])

    def _height_alg(self, f) -> Outcome:
        _, factors = parse_poly(self.config.minpoly).factor_list()
        rows = []
        for factor, _ in factors:
            if factor.degree < 1:
                continue
            for alpha in algebraic_roots(factor, claimed_irreducible=True):
                result = canonical_height_alg(f, alpha, self.bounds.alg_tol, self.bounds.alg_levels,
                                              self.bounds.max_bits)
                rows.append({"alpha": str(alpha.isolating_disk.center), "factor": factor.to_json(),
                             "value": repr(result.value), "error_radius": repr(result.error_radius),
                             "certified": result.certified})
        if not rows:
            raise ConfigError("minpoly has no roots")
        summary = {"map": f.to_json(), "minpoly": [str(c) for c in self.config.minpoly], "roots": rows}
        paths = [self._json("height", summary), self._csv("height", ALG_HEIGHT_COLUMNS, rows)]
        first = rows[0]
        message = self.messages.summary("height-alg", value=float(first["value"]),
                                        radius=float(first["error_radius"]), alpha=first["alpha"])
        return Outcome(message, summary, artifacts=paths)

    def _family_iterate(self, args: Namespace) -> Outcome:
        fam, start = self._family()
        n = args.n if getattr(args, "n", None) is not None else self.bounds.n_max
        pair = self._pair(fam, start)
        pair.extend_to(n)
        summary: Dict[str, Any] = {"family": fam.to_json(), "start": start.to_json(), "iterates": pair.to_json()}
        try:
            law = check_degree_law(fam, start, n, pair)
        except HypothesisNotMetError as exc:
            # retry from the first iterate whose degree clears m
            logger.warning("%s; normalizing the start point", exc)
            k, normalized = normalize_start(fam, start, self.bounds.normalize_cap, pair)
            summary["normalized_after"] = k
            summary["normalized_start"] = normalized.to_json()
            law = check_degree_law(fam, normalized, n)
        summary["degree_law"] = law.to_json()
        rows = [{"n": k, "deg_A": a, "deg_B": b} for k, (a, b) in enumerate(pair.degrees())]
        paths = [self._json("family-iterate", summary), self._csv("family-iterate", ["n", "deg_A", "deg_B"], rows)]
        message = self.messages.summary("family-iterate", levels=n,
                                        verdict="holds" if law.passed else "VIOLATED")
        return Outcome(message, summary, artifacts=paths, exit_code=0 if law.passed else 4)

    def _find_params(self, args: Namespace) -> Outcome:
        fam, start = self._family()
        params = find_preperiodic_params(fam, start, self.bounds.max_pre, self.bounds.max_per,
                                         self._pair(fam, start))
        entries = [p.to_json() for p in params]
        csv_rows = [{**e, "value": e["value"] if not isinstance(e["value"], dict) else e["lambda"]} for e in entries]
        summary = {"family": fam.to_json(), "start": start.to_json(), "max_pre": self.bounds.max_pre,
                   "max_per": self.bounds.max_per, "parameters": entries}
        paths = [self._json("find-params", summary), self._csv("find-params", PARAM_COLUMNS, csv_rows)]
        rational = sum(1 for p in params if p.is_rational)
        message = self.messages.summary("find-params", count=len(params), rational=rational,
                                        algebraic=len(params) - rational)
        rows = [{"lambda": e["lambda"], "kind": e["kind"], "status": "preperiodic"} for e in entries]
        return Outcome(message, summary, rows, paths)

    def _correlate(self, args: Namespace) -> Outcome:
        fam1, c1 = self._family()
        fam2, c2 = self._family("family2")
        table = correlation_experiment(fam1, c1, fam2, c2, self.bounds)
        csv_rows = [r.row() for r in table.rows]
        paths = [self._json("correlate", table.to_json()), self._csv("correlate", CORRELATION_COLUMNS, csv_rows)]
        rows = [{"lambda": r.lambda_repr, "kind": r.kind, "status": status_name(r.status_2),
                 "height_estimate": r.hhat_2_estimate, "error_radius": r.error_radius} for r in table.rows]
        return Outcome(self.messages.summary("correlate", **table.summary), table.to_json(), rows, paths)

    def _pcf(self, args: Namespace) -> Outcome:
        spec = self.config.pcf
        if spec is None:
            raise ConfigError("this command needs a 'pcf' section in the config")
        report = pcf_experiment(parse_poly(spec.f), parse_poly(spec.g), parse_poly(spec.x_of_t),
                                parse_poly(spec.y_of_t), self.bounds)
        path = self._json("pcf", report.to_json())
        message = self.messages.summary("pcf", pairs=len(report.tables), unsupported=len(report.unsupported))
        return Outcome(message, report.to_json(), artifacts=[path])

    def _metrics_report(self, args: Namespace) -> Outcome:
        fam, start = self._family()
        place = self._place(args)
        region = getattr(args, "region", None) or self.config.region
        n_max = self.bounds.n_max
        pair = self._pair(fam, start)
        L = self.bounds.L if self.bounds.L is not None else default_radius(fam)
        ratios = ratio_bounds_report(fam, start, place, L, self.bounds.sample_size, n_max, region,
                                     self.config.seed, pair)
        samples = parse_samples(self.config.samples) or sample_parameters(
            place, region, L, self.bounds.sample_size, self.config.seed)
        convergence = convergence_report(fam, start, place, samples, n_max, pair=pair)
        summary: Dict[str, Any] = {"family": fam.to_json(), "start": start.to_json(),
                                   "ratios": ratios.to_json(), "convergence": convergence.to_json()}
        lam = self._lam(args)
        if lam is not None:
            u0, u1 = (as_rat(u) for u in self.config.u)
            summary["metric"] = {"lambda": format_rat(lam), "u": [format_rat(u0), format_rat(u1)],
                                 "values": [metric_eval(pair, u0, u1, lam, place, n) for n in range(n_max + 1)]}
        paths = [self._json("metrics-report", summary),
                 self._csv("metrics-ratios", RATIO_COLUMNS, ratios.csv_rows()),
                 self._csv("metrics-convergence", CONVERGENCE_COLUMNS, convergence.csv_rows())]
        decay = convergence.decay_ratio
        message = self.messages.summary("metrics-report", C1=ratios.C1, C2=ratios.C2, C11=convergence.C11,
                                        decay="n/a" if decay is None else f"{decay:.4f}")
        return Outcome(message, summary, artifacts=paths)

    def _specialize(self, args: Namespace) -> Outcome:
        fam, start = self._family()
        samples = parse_samples(self.config.samples) or default_samples(self.bounds.sample_size)
        report = specialization_check(fam, start, samples, self.bounds.tol)
        summary = report.to_json()
        lam = self._lam(args)
        if lam is not None:
            try:
                first, shifted = height_ratio_invariance(fam, start, lam, self.config.k, self.bounds.tol)
                summary["ratio_invariance"] = {"lambda": format_rat(lam), "k": self.config.k,
                                               "ratio": first, "shifted_ratio": shifted}
            except UndefinedRatioError as exc:
                summary["ratio_invariance"] = {"lambda": format_rat(lam), "k": self.config.k, "undefined": str(exc)}
        csv_rows = [r.row() for r in report.rows]
        paths = [self._json("specialize", summary), self._csv("specialize", SPECIALIZATION_COLUMNS, csv_rows)]
        rows = [{"lambda": r.row()["lambda"], "kind": "rational", "height_estimate": r.hhat,
                 "error_radius": r.error} for r in report.rows]
        message = self.messages.summary("specialize", hhat=format_rat(Fraction(report.hhat_generic)),
                                        sup_error=report.sup_error, trend=report.trend)
        return Outcome(message, summary, rows, paths)

    # -- P² family -------------------------------------------------------

    def _p2(self, args: Namespace) -> Outcome:
        spec = self.config.p2
        fam = p2_family_from_spec(spec)
        lam, mu, a, b = (as_rat(v) for v in (spec.lam, spec.mu, spec.a, spec.b))
        point = parse_p2_point(args.point) if getattr(args, "point", None) else ProjPointP2.of(a, b, 1)
        command = args.p2_command
        name = f"p2-{command}"

        if command == "step":
            orbit = [point]
            for _ in range(getattr(args, "steps", None) or 1):
                orbit.append(p2_step(fam, orbit[-1], lam, mu))
            summary = {"map": fam.specialize(lam, mu).to_json(), "orbit": [p.to_json() for p in orbit]}
            message = self.messages.summary(name, point=point, image=orbit[1])
        elif command == "iterate":
            pair = p2_iterate_symbolic(fam, a, b, spec.n, self.bounds.max_degree, self.bounds.max_bits)
            summary = {"family": fam.to_json(), **pair.to_json()}
            message = self.messages.summary(name, levels=spec.n)
        elif command == "theta":
            report = p2_theta_check(P2IterPair(fam, a, b, self.bounds.max_degree, self.bounds.max_bits), spec.n)
            summary = {"family": fam.to_json(), **report.to_json()}
            message = self.messages.summary(name, levels=spec.n)
        elif command == "height":
            result = p2_canonical_height(fam, lam, mu, point, self.bounds.tol)
            summary = {"map": fam.specialize(lam, mu).to_json(), "point": point.to_json(), **result.to_json(),
                       "parameter_height": p2_parameter_height(fam, lam, mu, a, b, self.bounds.tol)}
            message = self.messages.summary(name, point=point, value=result.value, radius=result.error_radius)
        elif command == "orbit":
            result = p2_orbit_detect(fam, lam, mu, point, getattr(args, "max_steps", None))
            summary = {"map": fam.specialize(lam, mu).to_json(), "point": point.to_json(), **result.to_json()}
            message = self.messages.summary(name, point=point,
                                            kind="preperiodic" if result.is_preperiodic else "wandering")
        elif command == "ratios":
            place = self._place(args)
            L = self.bounds.L if self.bounds.L is not None else 2.0
            report = p2_ratio_report(fam, a, b, place, L, self.bounds.sample_size, spec.n, self.config.seed)
            summary = report.to_json()
            message = self.messages.summary(name, verdict="hold" if report.passed else "VIOLATED",
                                            L_star=report.L_star)
            return self._p2_outcome(name, message, summary, 0 if report.passed else 1)
        elif command == "counterexample":
            k_values = list(range(1, spec.k + 1)) if getattr(args, "up_to", False) else [spec.k]
            reports = map_ordered(p2_counterexample_check, k_values, self.config.threads)
            summary = {"reports": [r.to_json() for r in reports], "passed": all(r.passed for r in reports)}
            last = reports[-1]
            cycle = "-" if last.c2_cycle is None else f"preperiod {last.c2_cycle[0]}, period {last.c2_cycle[1]}"
            message = self.messages.summary(name, k=last.k, verdict="passed" if summary["passed"] else "FAILED",
                                            cycle=cycle)
            return self._p2_outcome(name, message, summary, 0 if summary["passed"] else 1)
        else:
            raise ConfigError(f"unknown p2 command {command!r}")
        return self._p2_outcome(name, message, summary)

    def _p2_outcome(self, name: str, message: str, summary: Dict, exit_code: int = 0) -> Outcome:
        return Outcome(message, summary, artifacts=[self._json(name, summary)], exit_code=exit_code)

    # -- plots -----------------------------------------------------------

    def _plot(self, args: Namespace) -> Outcome:
        fam, start = self._family()
        grid = compute_plot_grid(fam, start, self.config.plot, self.config.seed, self.config.threads)
        image, sidecar = emit_plot(grid, self.out / "plot.pgm")
        message = self.messages.summary("plot", image=image, resolution=grid.resolution, v_max=grid.v_max)
        return Outcome(message, grid.sidecar(), artifacts=[image, sidecar])


def _partial_json(partial: Any) -> Any:
    if hasattr(partial, "to_json"):
        return partial.to_json()
    if isinstance(partial, (list, tuple)):
        return [_partial_json(item) for item in partial]
    if isinstance(partial, Fraction):
        return format_rat(partial)
    return partial
