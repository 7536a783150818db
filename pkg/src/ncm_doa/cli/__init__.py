"""CLI package for the ncm-doa command.

This package provides the versioned run configuration, the per-scenario
pipeline stages with their sweep driver, and the argparse front end.
"""

from .app import EXIT_CONFIG, EXIT_OK, EXIT_STAGE, build_parser, configure_logging, main
from .config import EstimatorSettings, Method, RunConfig, load_config, load_run_config
from .pipeline import (
    beamform_stage,
    estimate_stage,
    merge_metrics,
    metrics_stage,
    run_pipeline,
    run_scenario,
    simulate_grid,
    simulate_stage,
    worker_count,
)

__all__ = [
    "EXIT_CONFIG",
    "EXIT_OK",
    "EXIT_STAGE",
    "EstimatorSettings",
    "Method",
    "RunConfig",
    "beamform_stage",
    "build_parser",
    "configure_logging",
    "estimate_stage",
    "load_config",
    "load_run_config",
    "main",
    "merge_metrics",
    "metrics_stage",
    "run_pipeline",
    "run_scenario",
    "simulate_grid",
    "simulate_stage",
    "worker_count",
]
