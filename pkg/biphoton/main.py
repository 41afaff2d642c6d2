"""
Command-line entry point: python -m biphoton <command> [options]

Exit codes: 0 success, 1 validation failure (usage errors included),
2 numerical failure (grid, peak, convergence), 3 I/O failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from dotenv import load_dotenv

from . import __description__, __version__
from .analysis_fit import FIT_PARAMETERS, Alignment, AnalysisOptions, Weighting
from .commands.analyze import cmd_analyze
from .commands.fit import cmd_fit
from .commands.simulate import cmd_simulate
from .commands.sweep import cmd_sweep
from .commands.wavepacket import cmd_wavepacket
from .errors import BiphotonError, ParameterValidationError
from .observability import (
    capture_exception, configure_logging, performance_monitor, sentry_manager, structured_logger,
)
from .schemas import SWEEPABLE, ErrorResponse, ExperimentConfig, StandardResponse, SweepSpec

logger = logging.getLogger(__name__)

INTERNAL_EXIT_CODE = 2


def _parse_floats(text: str, option: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ParameterValidationError(f"{option} expects comma-separated numbers: {text}") from e


def parse_sweep(text: str) -> SweepSpec:
    """'name=v1,v2,...' -> SweepSpec"""
    name, sep, values = text.partition("=")
    name = name.strip()
    if not sep or not values:
        raise ParameterValidationError(f"--sweep expects name=v1,v2,...: {text}")
    if name not in SWEEPABLE:
        raise ParameterValidationError(f"Unknown sweep parameter: {name}", details={"allowed": sorted(SWEEPABLE)})
    return SweepSpec(parameter=name, values=_parse_floats(values, "--sweep"))


def parse_assignments(text: Optional[str], option: str) -> Dict[str, float]:
    """'a=1,b=2' -> {'a': 1.0, 'b': 2.0}"""
    result: Dict[str, float] = {}
    for item in (text or "").split(","):
        if not item.strip():
            continue
        name, sep, value = item.partition("=")
        if not sep:
            raise ParameterValidationError(f"{option} expects name=value pairs: {text}")
        result[name.strip()] = _parse_floats(value, option)[0]
    return result


def parse_bounds(text: Optional[str]) -> Dict[str, Tuple[float, float]]:
    """'omega_c=0.1:1,gamma=1e-5:1e-2' -> {'omega_c': (0.1, 1.0), ...}"""
    bounds: Dict[str, Tuple[float, float]] = {}
    for item in (text or "").split(","):
        if not item.strip():
            continue
        name, _, limits = item.partition("=")
        lo, sep, hi = limits.partition(":")
        if not sep:
            raise ParameterValidationError(f"--bounds expects name=lo:hi pairs: {text}")
        bounds[name.strip()] = (_parse_floats(lo, "--bounds")[0], _parse_floats(hi, "--bounds")[0])
    return bounds


def parse_free(text: Optional[str]) -> List[str]:
    return [name.strip() for name in (text or "").split(",") if name.strip()]


class CommandLineParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors are validation failures (exit 1)"""

    def error(self, message: str):
        raise ParameterValidationError(message, details={"usage": self.format_usage().strip()})


def build_parser() -> argparse.ArgumentParser:
    parser = CommandLineParser(prog="biphoton", description=__description__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--log-format", choices=["text", "json"], default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p: argparse.ArgumentParser, required: bool = False):
        p.add_argument("--config", type=Path, required=required, help="Experiment config JSON")
        return p

    p = with_config(sub.add_parser("wavepacket", help="Compute G2(tau) and its widths"))
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = with_config(sub.add_parser("sweep", help="Sweep one parameter (linewidth and brightness tables)"))
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--sweep", default=None, help="name=v1,v2,... (overrides the config's sweep)")

    p = with_config(sub.add_parser("simulate", help="Synthesize time tags and a coincidence histogram"))
    p.add_argument("--out", type=Path, required=True, help="Output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--bins", type=float, default=None, help="Bin width in ns")

    p = with_config(sub.add_parser("analyze", help="Analyze a histogram JSON"))
    p.add_argument("histogram", type=Path)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--spectrum-out", type=Path, default=None)
    p.add_argument("--average", type=int, default=4, help="Moving-average length in bins")
    p.add_argument("--alignment", choices=[a.value for a in Alignment], default=Alignment.TRAILING.value)
    p.add_argument("--tail-fraction", type=float, default=0.2)
    p.add_argument("--no-exposure-correction", action="store_true")

    p = with_config(sub.add_parser("fit", help="Fit the wave-packet model to a histogram"))
    p.add_argument("histogram", type=Path)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--free", default="", help=f"Comma-separated subset of {','.join(FIT_PARAMETERS)}")
    p.add_argument("--init", default=None, help="name=value,... starting values")
    p.add_argument("--bounds", default=None, help="name=lo:hi,...")
    p.add_argument("--weighting", choices=[w.value for w in Weighting], default=Weighting.NONE.value)
    return parser


def load_config(args: argparse.Namespace) -> Optional[ExperimentConfig]:
    if args.config is None:
        return None
    return ExperimentConfig.load(args.config)


def run_command(args: argparse.Namespace) -> dict:
    config = load_config(args)

    if args.command == "wavepacket":
        return cmd_wavepacket(config or ExperimentConfig(), args.out, args.format)

    if args.command == "sweep":
        config = config or ExperimentConfig()
        if args.sweep:
            config = config.model_copy(update={"sweep": parse_sweep(args.sweep)})
        return cmd_sweep(config, args.out)

    if args.command == "simulate":
        config = config or ExperimentConfig()
        changes = {}
        if args.seed is not None:
            changes["rng_seed"] = args.seed
        if args.bins is not None:
            changes["bin_width_ns"] = args.bins
        if changes:
            config = config.model_copy(update={"acquisition": config.acquisition.replace(**changes)})
        return cmd_simulate(config, args.out)

    if args.command == "analyze":
        if not 1 <= args.average:
            raise ParameterValidationError("--average must be >= 1")
        options = AnalysisOptions(
            average_points=args.average,
            alignment=Alignment(args.alignment),
            tail_fraction=args.tail_fraction,
            correct_exposure=not args.no_exposure_correction,
        )
        return cmd_analyze(args.histogram, args.out, config, options, args.spectrum_out)

    if args.command == "fit":
        return cmd_fit(args.histogram, parse_assignments(args.init, "--init"), parse_free(args.free),
                       args.out, config, parse_bounds(args.bounds), args.weighting)

    raise ParameterValidationError(f"Unknown command: {args.command}")


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
    except ParameterValidationError as e:
        configure_logging()
        logger.error(f"Invalid command line: {e.message}")
        response = ErrorResponse(message=e.message, error_code=e.error_code,
                                 exit_code=e.exit_code, details=e.details or None)
        print(response.model_dump_json(indent=2))
        return e.exit_code
    configure_logging(level=args.log_level, fmt=args.log_format)
    sentry_manager.setup()

    try:
        data = run_command(args)
    except BiphotonError as e:
        structured_logger.log_command_failure(args.command, e.error_code, e.message)
        capture_exception(e, {"command": args.command})
        response = ErrorResponse(message=e.message, error_code=e.error_code,
                                 exit_code=e.exit_code, details=e.details or None)
        print(response.model_dump_json(indent=2))
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected failure in {args.command}: {e}", exc_info=True)
        capture_exception(e, {"command": args.command})
        response = ErrorResponse(message=str(e), error_code="INTERNAL_ERROR", exit_code=INTERNAL_EXIT_CODE)
        print(response.model_dump_json(indent=2))
        return INTERNAL_EXIT_CODE

    logger.debug(f"Performance summary: {performance_monitor.get_performance_summary()}")
    response = StandardResponse(success=True, message=f"{args.command} completed", data=data,
                                meta={"version": __version__})
    print(response.model_dump_json(indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
