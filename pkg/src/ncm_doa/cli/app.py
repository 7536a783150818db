"""Command-line front end.

Exit codes: 0 on success, 1 on configuration or input errors, 2 when a pipeline
stage fails.
"""

import argparse
import logging
from collections.abc import Sequence
from pathlib import Path

from rich.console import Console
from rich.logging import RichHandler

from ..evaluation import report
from ..exceptions import ConfigError, MetricsError, StageError
from ..simulation import SCENARIO_PRESETS
from .config import Method, RunConfig, load_config
from .pipeline import (
    beamform_stage,
    estimate_stage,
    run_pipeline,
    run_stage,
    simulate_grid,
)

logger = logging.getLogger(__name__)
console = Console()

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_STAGE = 2


def configure_logging(verbosity: int):
    """Install a rich handler on the package logger."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    handler = RichHandler(
        console=Console(stderr=True),
        show_path=verbosity > 1,
        rich_tracebacks=verbosity > 1,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    package = logging.getLogger("ncm_doa")
    package.handlers = [h for h in package.handlers if not isinstance(h, RichHandler)]
    package.addHandler(handler)
    package.setLevel(level)


def _settings(path: Path | None) -> RunConfig:
    return load_config(path) if path else RunConfig()


def _methods(codes: Sequence[str] | None, run: RunConfig) -> tuple[Method, ...]:
    if not codes:
        return run.selected
    return tuple(Method.resolve(code) for code in codes)


def _simulate(args) -> int:
    run = load_config(args.config)
    output = args.out or run.output
    for directory in simulate_grid(run.grid(), output):
        console.print(directory)
    return EXIT_OK


def _scenario_id(directory: Path) -> str:
    return Path(directory).name


def _estimate(args) -> int:
    run = _settings(args.config)
    methods = _methods(args.method, run)
    summary = run_stage(
        _scenario_id(args.scenario),
        "estimate",
        lambda: estimate_stage(args.scenario, run.estimator, methods),
    )
    for key in ("ncm", "msc", "wmsc"):
        if summary.get(key):
            console.print(f"{key}: {summary[key]['azimuth_deg']:.2f} deg")
    return EXIT_OK


def _beamform(args) -> int:
    run = _settings(args.config)
    method = Method.resolve(args.method)
    if method.beamformer is None:
        raise ConfigError(f"Method {method.code} does not beamform")
    weights = run_stage(
        _scenario_id(args.scenario),
        "beamform",
        lambda: beamform_stage(args.scenario, method, run.estimator),
    )
    console.print(
        f"{method.code}: {weights.n_bins} bins, {len(weights.collided_bins)} collided"
    )
    return EXIT_OK


def _report(args) -> int:
    metrics = args.metric or ["doa_error_deg"]
    path = report(args.metrics, args.group_by, args.out, metric=metrics)
    console.print(path)
    return EXIT_OK


def _sweep(args) -> int:
    base = _settings(args.config)
    overrides = {"scenarios": args.preset, "output": args.out}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.duration is not None:
        overrides["duration"] = args.duration
    run = RunConfig.model_validate(base.model_dump() | overrides)
    return run_pipeline(run, progress=not args.quiet)


def _run(args) -> int:
    run = load_config(args.config)
    if args.out:
        run = run.model_copy(update={"output": args.out})
    return run_pipeline(run, progress=not args.quiet)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncm-doa",
        description="Joint interferer DoA and noise covariance estimation.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="render and export scenarios")
    simulate.add_argument(
        "--config", type=Path, required=True, help="run or scenario config"
    )
    simulate.add_argument("--out", type=Path, help="output directory")
    simulate.set_defaults(handler=_simulate)

    estimate = sub.add_parser("estimate", help="estimate the interferer direction")
    estimate.add_argument(
        "--scenario", type=Path, required=True, help="scenario directory"
    )
    estimate.add_argument(
        "--config", type=Path, help="run config with estimator settings"
    )
    estimate.add_argument(
        "--method", action="append", help="method whose estimator to run (repeatable)"
    )
    estimate.set_defaults(handler=_estimate)

    beamform = sub.add_parser("beamform", help="design and apply a beamformer")
    beamform.add_argument(
        "--scenario", type=Path, required=True, help="scenario directory"
    )
    beamform.add_argument(
        "--method", required=True, help="NCM-LCMV, NCM-MVDR or MUSIC-LCMP"
    )
    beamform.add_argument(
        "--config", type=Path, help="run config with estimator settings"
    )
    beamform.set_defaults(handler=_beamform)

    report_parser = sub.add_parser(
        "report", help="boxplot statistics of a metrics CSV"
    )
    report_parser.add_argument(
        "--metrics", type=Path, required=True, help="metrics CSV"
    )
    report_parser.add_argument(
        "--group-by", required=True, help="parameter to fix, e.g. t60 or theta_b"
    )
    report_parser.add_argument(
        "--metric",
        action="append",
        help="metric column, repeatable (default: doa_error_deg)",
    )
    report_parser.add_argument("--out", type=Path, help="output CSV")
    report_parser.set_defaults(handler=_report)

    sweep = sub.add_parser("sweep", help="run a named scenario grid end to end")
    sweep.add_argument("--preset", required=True, help=", ".join(SCENARIO_PRESETS))
    sweep.add_argument("--out", type=Path, required=True, help="output directory")
    sweep.add_argument("--config", type=Path, help="run config with shared settings")
    sweep.add_argument("--seed", type=int, help="master seed")
    sweep.add_argument("--duration", type=float, help="scenario duration in seconds")
    sweep.add_argument("--quiet", action="store_true", help="hide the progress bar")
    sweep.set_defaults(handler=_sweep)

    run = sub.add_parser("run", help="run a run config end to end")
    run.add_argument("--config", type=Path, required=True, help="run config")
    run.add_argument("--out", type=Path, help="override the output directory")
    run.add_argument("--quiet", action="store_true", help="hide the progress bar")
    run.set_defaults(handler=_run)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the ``ncm-doa`` command."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except (ConfigError, MetricsError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except StageError as e:
        logger.error(str(e))
        return EXIT_STAGE
    except ValueError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG


__all__ = [
    "EXIT_CONFIG",
    "EXIT_OK",
    "EXIT_STAGE",
    "build_parser",
    "configure_logging",
    "main",
]
