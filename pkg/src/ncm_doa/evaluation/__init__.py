"""Evaluation package for metrics and sweep reports.

This package provides per-component filtering, enhancement metrics
(gSNR, gSIR, ISRF, DSRF), directivity and white-noise gain, angular
errors, boxplot statistics and the metrics CSV tables.
"""

from .metrics import (
    CSV_FIELDS,
    METRIC_FIELDS,
    PARAMETER_FIELDS,
    BoxplotStats,
    EnhancementReport,
    FilteredComponents,
    angular_error,
    boxplot_stats,
    build_report,
    enhancement_metrics,
    filter_components,
    ratio_db,
    read_rows,
    theoretical_metrics,
    to_db,
    write_metrics_csv,
    write_rows,
)
from .report import group_statistics, report, resolve_metric, resolve_parameter

__all__ = [
    "CSV_FIELDS",
    "METRIC_FIELDS",
    "PARAMETER_FIELDS",
    "BoxplotStats",
    "EnhancementReport",
    "FilteredComponents",
    "angular_error",
    "boxplot_stats",
    "build_report",
    "enhancement_metrics",
    "filter_components",
    "group_statistics",
    "ratio_db",
    "read_rows",
    "report",
    "resolve_metric",
    "resolve_parameter",
    "theoretical_metrics",
    "to_db",
    "write_metrics_csv",
    "write_rows",
]
