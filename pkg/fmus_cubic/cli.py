"""
Command-line interface for fmus-cubic.

Every command prints an envelope ``{command, inputs, results, seed, version}``
as JSON, or the tabular part of the results as CSV with ``--format csv``.
Exit status is 0 on success, 2 on usage errors and 1 on numerical failures.
"""

import argparse
import json
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from fmus_cubic import __version__
from fmus_cubic.config import (
    SEED_ENV_VAR,
    CalibrationEntry,
    Defaults,
    write_calibration,
)
from fmus_cubic.core.params import CubicParams, NetworkPath
from fmus_cubic.exceptions import DomainError, NumericalError
from fmus_cubic.models import fluid, limit_chain, packet_sim, response
from fmus_cubic.models.base import registered_methods
from fmus_cubic.utils.stats import ks_distance, lattice_ks_distance

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2

# Grid on which the H(y) dominance check is reported.
_DOMINANCE_XS = np.linspace(0.0, 100.0, 101)
_DOMINANCE_YS = np.linspace(0.0, 5.0, 51)


class CommandResult:
    """What a command hands back to :func:`main` for printing."""

    def __init__(
        self,
        inputs: Dict[str, Any],
        results: Any,
        seed: Optional[int] = None,
        frame: Optional[pd.DataFrame] = None,
    ):
        self.inputs = inputs
        self.results = results
        self.seed = seed
        self.frame = frame


def _typed(convert: Callable[[str], Any], check: Callable[[Any], bool], message: str):
    def parse(text: str) -> Any:
        try:
            value = convert(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}") from None
        if not check(value):
            raise argparse.ArgumentTypeError(f"{message}, got {text!r}")
        return value

    return parse


positive_float = _typed(float, lambda v: math.isfinite(v) and v > 0, "must be > 0")
non_negative_float = _typed(float, lambda v: math.isfinite(v) and v >= 0, "must be >= 0")
open_unit_float = _typed(float, lambda v: 0 < v < 1, "must lie in (0, 1)")
positive_int = _typed(int, lambda v: v >= 1, "must be an integer >= 1")
non_negative_int = _typed(int, lambda v: v >= 0, "must be an integer >= 0")


def _float_list(item: Callable[[str], float]) -> Callable[[str], List[float]]:
    def parse(text: str) -> List[float]:
        parts = [part.strip() for part in text.split(",") if part.strip()]
        if not parts:
            raise argparse.ArgumentTypeError("list must not be empty")
        return [item(part) for part in parts]

    return parse


def _method_list(text: str) -> List[str]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise argparse.ArgumentTypeError("list must not be empty")
    unknown = [name for name in names if name not in registered_methods()]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown method(s) {', '.join(unknown)}; choose from {', '.join(registered_methods())}"
        )
    return names


def _jsonable(value: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _params(args: argparse.Namespace) -> CubicParams:
    return CubicParams(c=args.C, beta=args.beta)


def cmd_fluid(args: argparse.Namespace) -> CommandResult:
    params = _params(args)
    path = NetworkPath(rtt=args.rtt, drop_prob=args.p)
    solution = fluid.solve(params, path)
    results = solution.to_dict()
    if args.reno:
        # Published fluid columns carry the Reno-mode floor.
        window = response.mean_window_det(params, path.rtt, path.drop_prob, args.reno_coefficient)
        results.update(
            fluid_mean_window=solution.mean_window,
            mean_window=window,
            throughput=window / path.rtt,
            reno_branch=window > solution.mean_window,
        )
    inputs = {**params.to_dict(), **path.to_dict(), "reno": args.reno}
    return CommandResult(inputs, results)


def cmd_iterate(args: argparse.Namespace) -> CommandResult:
    params = _params(args)
    path = NetworkPath(rtt=args.rtt, drop_prob=args.p)
    x_star = fluid.fixed_point(params, path)
    columns: Dict[str, List[float]] = {"k": list(range(args.iters + 1))}
    for x0 in args.x0:
        columns[f"x0={x0:g}"] = fluid.iterate_loss_map(params, path, x0, args.iters)
    inputs = {**params.to_dict(), **path.to_dict(), "x0": args.x0, "iters": args.iters}
    results = {"x_star": x_star, "trajectories": columns}
    return CommandResult(inputs, results, frame=pd.DataFrame(columns))


def cmd_simulate(args: argparse.Namespace) -> CommandResult:
    params = _params(args)
    path = NetworkPath(rtt=args.rtt, drop_prob=args.p, w_max=args.wmax)
    config = packet_sim.SimConfig(
        params=params,
        path=path,
        n_rtts=args.rtts,
        seed=args.seed,
        reno_mode=args.reno,
        trace_rtts=args.trace,
        accounting=packet_sim.Accounting(args.accounting),
    )
    if args.replications > 1:
        stats = packet_sim.simulate_replications(config, args.replications, args.threads)
    else:
        stats = packet_sim.simulate(config)
    inputs = {**config.to_dict(), "replications": args.replications}
    results = stats.to_dict(include_epochs=args.epochs)
    frame = None
    if args.trace:
        frame = pd.DataFrame({"rtt_index": range(1, len(stats.trace) + 1), "window": stats.trace})
    return CommandResult(inputs, results, seed=args.seed, frame=frame)


def cmd_limit_mc(args: argparse.Namespace) -> CommandResult:
    params = _params(args)
    law = limit_chain.GbarLaw(params, args.rtt, limit_chain.ExponentVariant(args.variant))
    inputs = {**law.to_dict(), "n": args.n, "burn_in": args.burnin, "v0": args.v0}
    if args.trace:
        trace = limit_chain.running_mean_trace(law, args.n, args.seed, args.v0)
        frame = pd.DataFrame({"n": range(1, args.n + 1), "running_mean": trace})
        return CommandResult(inputs, {"running_mean": trace}, seed=args.seed, frame=frame)
    estimate = limit_chain.estimate_mean_gbar(law, args.n, args.burnin, args.seed, args.v0)
    return CommandResult(inputs, estimate.to_dict(), seed=args.seed)


def cmd_table(args: argparse.Namespace) -> CommandResult:
    params = _params(args)
    sim_options = {"n_rtts": args.rtts, "seed": args.seed, "reno_mode": args.reno}
    method_options = {
        "det_fluid": {"reno_coefficient": args.reno_coefficient},
        "approx_markov": {
            "coefficient": args.coefficient,
            "reno_coefficient": args.reno_coefficient,
        },
    }
    table = response.generate_table(
        args.p_list,
        args.rtt_list,
        methods=args.methods,
        sim_config_defaults=sim_options,
        params=params,
        quantity=args.quantity,
        threads=args.threads,
        method_options=method_options,
    )
    inputs = {
        **params.to_dict(),
        "p_list": args.p_list,
        "R_list": args.rtt_list,
        "methods": args.methods,
        "quantity": args.quantity,
    }
    seed = args.seed if "packet_sim" in args.methods else None
    if "packet_sim" in args.methods:
        inputs.update(n_rtts=args.rtts, reno_mode=args.reno)
    return CommandResult(inputs, response.table_to_records(table), seed=seed, frame=table)


def cmd_bound(args: argparse.Namespace) -> CommandResult:
    params = _params(args)
    law = limit_chain.GbarLaw(params, 1.0, limit_chain.ExponentVariant(args.variant))
    gamma = limit_chain.gamma_constant(params, law.variant)
    rows = []
    for y in args.y_list:
        x_star = limit_chain.bound_xstar_of_y(law, y) if y > 0 else None
        rows.append({"y": y, "H": limit_chain.h_bound(law, y), "x_star": x_star})
    violation = limit_chain.h_dominates(law, _DOMINANCE_XS, _DOMINANCE_YS)
    results: Dict[str, Any] = {
        "gamma": gamma,
        "bound": rows,
        "dominance": {
            "holds": violation is None,
            "violation": violation,
            "x_range": [0.0, 100.0, len(_DOMINANCE_XS)],
            "y_range": [0.0, 5.0, len(_DOMINANCE_YS)],
        },
    }
    frame = pd.DataFrame(rows)
    if args.x_list:
        grid = limit_chain.survival_grid(law, args.x_list, args.y_list)
        results["survival"] = grid
        frame = pd.DataFrame(grid)
    inputs = {**law.to_dict(), "y_list": args.y_list, "x_list": args.x_list}
    return CommandResult(inputs, results, frame=frame)


def cmd_ks(args: argparse.Namespace) -> CommandResult:
    params = _params(args)
    law = limit_chain.GbarLaw(params, args.rtt)
    rows = []
    for p in args.p:
        samples = packet_sim.empirical_scaled_g(params, args.rtt, p, args.x, args.samples, args.seed)
        distance, support = lattice_ks_distance(samples, lambda y: limit_chain.gbar_cdf(law, args.x, y))
        rows.append(
            {
                "p": p,
                "ks": distance,
                "ks_continuous": ks_distance(samples, lambda y: limit_chain.gbar_cdf(law, args.x, y)),
                "support_points": support,
                "mean_scaled_g": float(np.mean(samples)),
            }
        )
    inputs = {**law.to_dict(), "p": args.p, "x": args.x, "samples": args.samples}
    return CommandResult(inputs, rows, seed=args.seed, frame=pd.DataFrame(rows))


def cmd_calibrate(args: argparse.Namespace) -> CommandResult:
    variant = limit_chain.ExponentVariant(args.variant)
    entries = []
    for beta in args.beta_list:
        params = CubicParams(c=args.C, beta=beta)
        law = limit_chain.GbarLaw(params, 1.0, variant)
        estimate = limit_chain.estimate_mean_gbar(law, args.n, args.burnin, args.seed)
        entries.append(
            CalibrationEntry(
                c=params.c,
                beta=params.beta,
                coefficient=estimate.coefficient,
                mean_gbar=estimate.mean_gbar,
                variant=variant.value,
                n=args.n,
                seed=args.seed,
            )
        )
    if args.out:
        write_calibration(entries, args.out)
    inputs = {"C": args.C, "beta_list": args.beta_list, "n": args.n, "burn_in": args.burnin, "variant": variant.value}
    rows = [entry.to_dict() for entry in entries]
    return CommandResult(inputs, rows, seed=args.seed, frame=pd.DataFrame(rows))


def _add_output(parser: argparse.ArgumentParser, default_format: str = "json") -> None:
    parser.add_argument("--format", choices=["json", "csv"], default=default_format, help="output format")
    parser.add_argument(
        "--digits",
        type=non_negative_int,
        default=4,
        help="significant digits in CSV output, 0 for full precision",
    )
    parser.add_argument("--threads", type=positive_int, default=None, help="worker threads")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")


def _add_protocol(parser: argparse.ArgumentParser, defaults: Defaults) -> None:
    parser.add_argument("--C", type=positive_float, default=defaults.c, help="CUBIC growth scale")
    parser.add_argument("--beta", type=open_unit_float, default=defaults.beta, help="back-off fraction")


def _add_rtt(parser: argparse.ArgumentParser, defaults: Defaults) -> None:
    parser.add_argument("--rtt", type=positive_float, default=defaults.rtt, help="round-trip time in seconds")


def _add_seed(parser: argparse.ArgumentParser, defaults: Defaults) -> None:
    parser.add_argument(
        "--seed",
        type=non_negative_int,
        default=defaults.seed,
        help=f"random seed (default {defaults.seed}; overridable with {SEED_ENV_VAR})",
    )


def _add_variant(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--variant",
        choices=[v.value for v in limit_chain.ExponentVariant],
        default=limit_chain.ExponentVariant.PRINTED.value,
        help="survival exponent variant",
    )


def build_parser(defaults: Optional[Defaults] = None) -> argparse.ArgumentParser:
    """
    Build the argument parser.

    Args:
        defaults (Defaults, optional): Defaults to show and apply.

    Returns:
        argparse.ArgumentParser: The parser with one subcommand per computation.
    """
    defaults = Defaults() if defaults is None else defaults

    parser = argparse.ArgumentParser(
        prog="fmus-cubic", description="TCP CUBIC throughput models, simulator and tables."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fluid", help="deterministic-loss fluid solution")
    _add_output(p)
    _add_protocol(p, defaults)
    _add_rtt(p, defaults)
    p.add_argument("--p", type=open_unit_float, default=0.01, help="drop probability")
    p.add_argument("--reno", action=argparse.BooleanOptionalAction, default=True, help="apply the Reno-mode floor")
    p.add_argument("--reno-coefficient", type=positive_float, default=defaults.reno_coefficient)
    p.set_defaults(handler=cmd_fluid)

    p = sub.add_parser("iterate", help="loss-map iterates as CSV")
    _add_output(p, "csv")
    _add_protocol(p, defaults)
    _add_rtt(p, defaults)
    p.add_argument("--p", type=open_unit_float, default=0.01, help="drop probability")
    p.add_argument(
        "--x0", type=_float_list(positive_float), default=[1.0, 100.0], help="comma-separated initial windows"
    )
    p.add_argument("--iters", type=non_negative_int, default=50, help="number of iterations")
    p.set_defaults(handler=cmd_iterate)

    p = sub.add_parser("simulate", help="seeded packet-level simulation")
    _add_output(p)
    _add_protocol(p, defaults)
    _add_rtt(p, defaults)
    _add_seed(p, defaults)
    p.add_argument("--p", type=open_unit_float, default=0.01, help="drop probability")
    p.add_argument("--wmax", type=positive_int, default=defaults.w_max, help="window cap in packets")
    p.add_argument("--rtts", type=positive_int, default=defaults.sim_rtts, help="RTTs to simulate")
    p.add_argument("--reno", action=argparse.BooleanOptionalAction, default=True, help="Reno-friendly floor")
    p.add_argument("--replications", type=positive_int, default=1, help="independent replications")
    p.add_argument("--trace", type=non_negative_int, default=0, help="record the first N windows")
    p.add_argument(
        "--accounting",
        choices=[a.value for a in packet_sim.Accounting],
        default=packet_sim.Accounting.LOST_PACKET.value,
        help="packets of the lossy RTT counted as sent",
    )
    p.add_argument("--epochs", action="store_true", help="include every loss epoch in the output")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("limit-mc", help="limit-chain Monte Carlo estimate")
    _add_output(p)
    _add_protocol(p, defaults)
    _add_rtt(p, defaults)
    _add_seed(p, defaults)
    _add_variant(p)
    p.add_argument("--n", type=positive_int, default=defaults.n, help="retained samples")
    p.add_argument("--burnin", type=non_negative_int, default=defaults.burn_in, help="discarded steps")
    p.add_argument("--v0", type=non_negative_float, default=limit_chain.DEFAULT_V0, help="initial scaled window")
    p.add_argument("--trace", action="store_true", help="emit the running mean instead of the estimate")
    p.set_defaults(handler=cmd_limit_mc)

    p = sub.add_parser("table", help="mean window or goodput tables")
    _add_output(p, "csv")
    _add_protocol(p, defaults)
    _add_seed(p, defaults)
    p.add_argument(
        "--p-list",
        type=_float_list(open_unit_float),
        default=list(response.TABLE_I_GRID.p_list),
        help="comma-separated drop probabilities",
    )
    p.add_argument(
        "--rtt-list",
        type=_float_list(positive_float),
        default=list(response.TABLE_I_GRID.rtt_list),
        help="comma-separated round-trip times",
    )
    p.add_argument("--methods", type=_method_list, default=["det_fluid", "approx_markov"], help="comma-separated methods")
    p.add_argument("--quantity", choices=response.QUANTITIES, default="window")
    p.add_argument("--coefficient", type=positive_float, default=None, help="fixed approx_markov coefficient")
    p.add_argument("--reno-coefficient", type=positive_float, default=defaults.reno_coefficient)
    p.add_argument("--rtts", type=positive_int, default=defaults.sim_rtts, help="RTTs per simulated cell")
    p.add_argument("--reno", action=argparse.BooleanOptionalAction, default=True, help="Reno-friendly floor in packet_sim")
    p.add_argument("--out", default=None, help="write the output to this file instead of stdout")
    p.set_defaults(handler=cmd_table)

    p = sub.add_parser("bound", help="uniform survival bound H(y)")
    _add_output(p)
    _add_protocol(p, defaults)
    _add_variant(p)
    p.add_argument(
        "--y-list", type=_float_list(non_negative_float), default=[0.0, 0.5, 1.0, 2.0, 3.0], help="comma-separated y"
    )
    p.add_argument("--x-list", type=_float_list(non_negative_float), default=None, help="also emit survival curves")
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser("ks", help="KS distance of scaled inter-loss times to the limit law")
    _add_output(p)
    _add_protocol(p, defaults)
    _add_rtt(p, defaults)
    _add_seed(p, defaults)
    p.add_argument("--p", type=_float_list(open_unit_float), default=[1e-4], help="comma-separated drop probabilities")
    p.add_argument("--x", type=positive_float, default=1.0, help="scaled post-loss window")
    p.add_argument("--samples", type=positive_int, default=100000, help="first-loss samples")
    p.set_defaults(handler=cmd_ks)

    p = sub.add_parser("calibrate", help="regenerate response coefficients")
    _add_output(p)
    p.add_argument("--C", type=positive_float, default=defaults.c, help="CUBIC growth scale")
    p.add_argument("--beta-list", type=_float_list(open_unit_float), default=[0.3, 0.2])
    _add_seed(p, defaults)
    _add_variant(p)
    p.add_argument("--n", type=positive_int, default=defaults.n, help="retained samples")
    p.add_argument("--burnin", type=non_negative_int, default=defaults.burn_in, help="discarded steps")
    p.add_argument("--out", default=None, help="calibration file to write")
    p.set_defaults(handler=cmd_calibrate)
    return parser


def _render(command: str, result: CommandResult, args: argparse.Namespace) -> str:
    if args.format == "csv":
        frame = result.frame
        if frame is None:
            frame = pd.DataFrame([result.results])
        float_format = f"%.{args.digits}g" if args.digits else None
        return frame.to_csv(index=False, float_format=float_format, lineterminator="\n")
    envelope = {
        "command": command,
        "inputs": result.inputs,
        "results": result.results,
        "seed": result.seed,
        "version": __version__,
    }
    return json.dumps(_jsonable(envelope), indent=2) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line.

    Args:
        argv (sequence, optional): Arguments without the program name.

    Returns:
        int: Process exit status.
    """
    try:
        defaults = Defaults.from_env()
    except DomainError as exc:
        print(f"fmus-cubic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser(defaults)
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    # Run the command; domain errors exit through argparse
    try:
        result = args.handler(args)
    except DomainError as exc:
        parser.error(str(exc))
    except NumericalError as exc:
        logger.error("%s failed: %s", args.command, exc)
        print(f"fmus-cubic: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    # Write output
    text = _render(args.command, result, args)
    out = getattr(args, "out", None)
    if out and args.command == "table":
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
