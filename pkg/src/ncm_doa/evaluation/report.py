"""Marginal boxplot statistics of a metrics table.

For one swept parameter each row of the output fixes a value of that
parameter and a method, and summarizes one metric over every other
parameter.
"""

import logging
from collections import defaultdict
from collections.abc import Sequence
from pathlib import Path

from ..exceptions import UnknownParameterError
from ..suggest import did_you_mean
from .metrics import METRIC_FIELDS, PARAMETER_FIELDS, boxplot_stats, read_rows, write_rows

logger = logging.getLogger(__name__)

PARAMETER_ALIASES: dict[str, str] = {
    "t60": "t60_ms",
    "d_x": "desired_distance",
    "dx": "desired_distance",
    "d_p": "interferer_distance",
    "dp": "interferer_distance",
    "sir": "sir_db",
    "scr": "scr_db",
    "theta_b": "interferer_azimuth",
    "azimuth": "interferer_azimuth",
}
"""dict: Short names accepted for the group-by parameter."""

REPORT_FIELDS: tuple[str, ...] = (
    "parameter",
    "value",
    "method",
    "metric",
    "count",
    "p9",
    "p25",
    "p50",
    "p75",
    "p91",
)


def resolve_parameter(name: str) -> str:
    """Map a parameter name or alias to its metrics column.

    Raises:
        UnknownParameterError: If the name is unknown.
    """
    key = name.lower()
    if key in PARAMETER_FIELDS:
        return key
    if key in PARAMETER_ALIASES:
        return PARAMETER_ALIASES[key]
    choices = list(PARAMETER_FIELDS) + list(PARAMETER_ALIASES)
    raise UnknownParameterError(
        f"Unknown group-by parameter {name!r}." + did_you_mean(name, choices)
    )


def resolve_metric(name: str) -> str:
    """Validate a metric column name.

    Raises:
        UnknownParameterError: If the name is not a metric column.
    """
    if name in METRIC_FIELDS:
        return name
    raise UnknownParameterError(
        f"Unknown metric {name!r}." + did_you_mean(name, METRIC_FIELDS)
    )


def group_statistics(
    rows: list[dict[str, str]], parameter: str, metric: str = "doa_error_deg"
) -> list[dict[str, str]]:
    """Boxplot statistics per (parameter value, method).

    Rows with an empty metric cell are skipped; groups left empty are dropped.

    Raises:
        UnknownParameterError: If the parameter or metric is unknown.
    """
    column = resolve_parameter(parameter)
    metric = resolve_metric(metric)
    groups: dict[tuple[float, str], list[float]] = defaultdict(list)
    for row in rows:
        cell = row.get(metric, "")
        if cell == "":
            continue
        groups[(float(row[column]), row["method"])].append(float(cell))

    output = []
    for (value, method), samples in sorted(groups.items()):
        stats = boxplot_stats(samples)
        output.append(
            {
                "parameter": column,
                "value": f"{value:g}",
                "method": method,
                "metric": metric,
                "count": str(stats.count),
                **{
                    name: f"{q:.6f}"
                    for name, q in zip(
                        ("p9", "p25", "p50", "p75", "p91"), stats.as_tuple(), strict=True
                    )
                },
            }
        )
    return output


def report(
    metrics_path: Path,
    group_by: str,
    out_path: Path | None = None,
    *,
    metric: str | Sequence[str] = "doa_error_deg",
) -> Path:
    """Write marginal boxplot statistics of a metrics CSV.

    Args:
        metrics_path: Metrics CSV.
        group_by: Parameter to fix (name or alias, e.g. ``"t60"``).
        out_path: Output CSV; ``<metrics stem>-by-<parameter>.csv`` when None.
        metric: Metric column, or several, to summarize. The statistics of
            each metric follow one another in the given order.

    Returns:
        Path: The written file.

    Raises:
        MetricsError: If the metrics file is missing or unreadable.
        UnknownParameterError: If the parameter or a metric is unknown.
    """
    metrics_path = Path(metrics_path)
    column = resolve_parameter(group_by)
    names = [metric] if isinstance(metric, str) else list(metric)
    names = list(dict.fromkeys(resolve_metric(name) for name in names))
    rows = read_rows(metrics_path)
    statistics = [
        stat for name in names for stat in group_statistics(rows, column, name)
    ]
    out_path = out_path or metrics_path.with_name(
        f"{metrics_path.stem}-by-{column}.csv"
    )
    logger.debug(f"Writing {len(statistics)} statistics rows to {out_path}")
    return write_rows(out_path, statistics, REPORT_FIELDS)



__all__ = [
    "PARAMETER_ALIASES",
    "REPORT_FIELDS",
    "group_statistics",
    "report",
    "resolve_metric",
    "resolve_parameter",
]
