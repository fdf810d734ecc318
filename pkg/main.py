import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

from errors import ConfigError, DynamicsError
from experiment_controller import PROGRAM, ExperimentController
from utils.spec_parser import parse_rational_list
from utils.validators import ExperimentConfig, load_config, validate_config

logger = logging.getLogger(__name__)

P2_COMMANDS = ("step", "iterate", "theta", "height", "orbit", "ratios", "counterexample")


def build_parser() -> argparse.ArgumentParser:
    """Parser for the global flags and every subcommand."""
    parser = argparse.ArgumentParser(prog=PROGRAM, description="Exact experiments with families of rational maps.")
    parser.add_argument("--config", help="JSON experiment config")
    parser.add_argument("--out", help="output directory (default: config 'out')")
    parser.add_argument("--seed", type=int, help="random seed for parameter samples")
    parser.add_argument("--threads", type=int, help="worker processes")
    parser.add_argument("--db", help="SQLAlchemy URL to store run summaries, e.g. sqlite:///runs.db")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", help="check the family hypotheses")

    orbit = sub.add_parser("orbit", help="decide preperiodicity of a point")
    orbit.add_argument("--point", help="rational point or 'inf'")
    orbit.add_argument("--max-steps", type=int)

    height = sub.add_parser("height", help="canonical height of a point (or of the roots of 'minpoly')")
    height.add_argument("--point", help="rational point or 'inf'")

    iterate = sub.add_parser("family-iterate", help="symbolic iterates and the degree law")
    iterate.add_argument("--n", type=int, help="deepest level")

    for name, text in (("find-params", "preperiodic parameters of the moving point"),
                       ("correlate", "classify a second family at those parameters"),
                       ("pcf", "correlate critical orbits of two translation families")):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--max-pre", type=int)
        cmd.add_argument("--max-per", type=int)

    metrics = sub.add_parser("metrics-report", help="ratio bounds and convergence of the limit metric")
    metrics.add_argument("--place", help="'arch' or a prime")
    metrics.add_argument("--region", choices=["U", "V"])
    metrics.add_argument("--lam", help="also evaluate the metric of the section u at this λ")
    metrics.add_argument("--n-max", type=int)
    metrics.add_argument("--sample-size", type=int)
    metrics.add_argument("--L", type=float)

    special = sub.add_parser("specialize", help="compare ĥ_{f_λ}(c(λ)) with ĥ_f(c)·h(λ)")
    special.add_argument("--samples", help="rationals, e.g. '1,-1,1/2'")
    special.add_argument("--lam", help="also check height-ratio invariance at this λ")
    special.add_argument("--k", type=int)

    p2 = sub.add_parser("p2", help="the two-parameter family on P²")
    p2_sub = p2.add_subparsers(dest="p2_command", required=True)
    for name in P2_COMMANDS:
        cmd = p2_sub.add_parser(name)
        if name in ("step", "height", "orbit"):
            cmd.add_argument("--point", help="'X,Y,Z' or affine 'x,y' (default [a:b:1])")
        if name in ("iterate", "theta", "ratios"):
            cmd.add_argument("--n", type=int)
        if name == "step":
            cmd.add_argument("--steps", type=int)
        if name == "orbit":
            cmd.add_argument("--max-steps", type=int)
        if name == "ratios":
            cmd.add_argument("--place", help="'arch' or a prime")
            cmd.add_argument("--L", type=float)
        if name == "counterexample":
            cmd.add_argument("--k", type=int)
            cmd.add_argument("--up-to", action="store_true", help="check every k from 1")

    plot = sub.add_parser("plot", help="escape-rate picture of the λ-plane (PGM)")
    plot.add_argument("--center-re", type=float)
    plot.add_argument("--center-im", type=float)
    plot.add_argument("--width", type=float)
    plot.add_argument("--resolution", type=int)
    plot.add_argument("--levels", type=int)
    return parser


def apply_overrides(config: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    """Flags override config fields; the result is validated again."""
    data: Dict[str, Any] = config.model_dump(mode="json", exclude_none=True)
    bounds, plot = data["bounds"], data["plot"]

    def put(target: Dict, key: str, value: Any) -> None:
        if value is not None:
            target[key] = value

    put(data, "out", args.out)
    put(data, "seed", args.seed)
    put(data, "threads", args.threads)
    for key in ("max_pre", "max_per", "n_max", "sample_size", "L"):
        put(bounds, key, getattr(args, key, None))
    for key in ("center_re", "center_im", "width", "resolution", "levels"):
        put(plot, key, getattr(args, key, None))
    put(data, "point", getattr(args, "point", None) if args.command != "p2" else None)
    put(data, "lam", getattr(args, "lam", None))
    put(data, "place", getattr(args, "place", None))
    put(data, "region", getattr(args, "region", None))
    if getattr(args, "samples", None):
        data["samples"] = [str(x) for x in parse_rational_list(args.samples)]
    if args.command == "p2":
        if "p2" not in data:
            raise ConfigError("this command needs a 'p2' section in the config")
        put(data["p2"], "n", getattr(args, "n", None))
        put(data["p2"], "k", getattr(args, "k", None))
    else:
        put(data, "k", getattr(args, "k", None))
    return validate_config(data)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand.

    Returns:
        0 ok, 1 domain failure, 2 config error, 3 resource cap, 4 invariant violation
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    command = args.command
    controller = None
    try:
        config = apply_overrides(load_config(args.config), args)
        controller = ExperimentController(config, args.db)
        outcome = controller.run(command, args)
    except DynamicsError as exc:
        partial = "-"
        if controller is not None:
            try:
                partial = str(controller.write_failure(command, exc))
            except OSError as io_exc:
                logger.error("cannot record the failure: %s", io_exc)
        messages = controller.messages if controller is not None else None
        if messages is not None:
            print(messages.failure(exc.exit_code, command, str(exc), partial), file=sys.stderr)
        else:
            print(f"{PROGRAM}: {command}: {exc}", file=sys.stderr)
        return exc.exit_code
    print(outcome.message)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
