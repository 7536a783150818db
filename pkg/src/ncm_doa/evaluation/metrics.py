"""Enhancement, theoretical and angular metrics.

Enhancement metrics compare variances of filtered components with the
same components on the reference sensor. Both sides go through the same
STFT analysis and synthesis, so an identity filter scores 0 dB on every
ratio. The desired signal is the desired direct path only.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import defaults
from ..exceptions import EmptySampleError, MetricsError
from ..geometry import DoA, SensorArray, isotropic_pseudocov
from ..simulation import COMPONENTS, ScenarioSignals
from ..spectral import StftConfig, apply_weights, istft, stft
from ..storage import atomic_path

logger = logging.getLogger(__name__)

NOISE_COMPONENTS: tuple[str, ...] = tuple(c for c in COMPONENTS if c != "desired")
"""tuple[str, ...]: Everything but the desired direct path."""

INTERFERENCE_COMPONENTS: tuple[str, ...] = ("interferer", "interferer_reverb")
"""tuple[str, ...]: The interfering source, direct path and reverberation."""


@dataclass(frozen=True, eq=False)
class FilteredComponents:
    """Filtered and reference versions of every scenario component.

    Attributes:
        filtered: Single-channel filter outputs keyed by component.
        references: Reference-sensor signals through the same STFT round trip.
    """

    filtered: dict[str, np.ndarray]
    references: dict[str, np.ndarray]

    def total(self, names, *, reference: bool = False) -> np.ndarray:
        source = self.references if reference else self.filtered
        return np.sum([source[name] for name in names], axis=0)


def filter_components(
    signals: ScenarioSignals, weights, config: StftConfig | None = None
) -> FilteredComponents:
    """Filter each component separately with the same weights.

    Raises:
        DimensionMismatchError: If the weights do not match the STFT (from apply_weights).
    """
    config = config or StftConfig.for_bins(signals.array.bins)
    ref = signals.array.reference
    filtered = {}
    references = {}
    for name in COMPONENTS:
        frames = stft(signals.component(name), config)
        filtered[name] = istft(apply_weights(frames, weights))
        references[name] = istft(frames.channel(ref))
    return FilteredComponents(filtered=filtered, references=references)


def _variance(signal: np.ndarray) -> float:
    return float(np.var(signal))


def ratio_db(numerator: float, denominator: float) -> float:
    """``10 log10(numerator / denominator)`` with infinities for zero operands."""
    if denominator <= 0:
        return math.inf if numerator > 0 else 0.0
    if numerator <= 0:
        return -math.inf
    return 10.0 * math.log10(numerator / denominator)


def _ratio_change(output: float, reference: float) -> float:
    """Change of a ratio in dB; the same infinity on both sides is no change."""
    if math.isinf(output) and output == reference:
        return 0.0
    return output - reference


def enhancement_metrics(components: FilteredComponents) -> dict[str, float]:
    """gSNR, gSIR, ISRF and DSRF in dB.

    - gSNR: output over input desired-to-noise variance ratio.
    - gSIR: the same against the interfering source only.
    - ISRF: interferer direct-path variance reduction.
    - DSRF: desired direct-path variance reduction.
    """
    x_in = _variance(components.references["desired"])
    x_out = _variance(components.filtered["desired"])
    noise_in = _variance(components.total(NOISE_COMPONENTS, reference=True))
    noise_out = _variance(components.total(NOISE_COMPONENTS))
    interference_in = _variance(components.total(INTERFERENCE_COMPONENTS, reference=True))
    interference_out = _variance(components.total(INTERFERENCE_COMPONENTS))
    p_in = _variance(components.references["interferer"])
    p_out = _variance(components.filtered["interferer"])
    return {
        "gsnr_db": _ratio_change(ratio_db(x_out, noise_out), ratio_db(x_in, noise_in)),
        "gsir_db": _ratio_change(
            ratio_db(x_out, interference_out), ratio_db(x_in, interference_in)
        ),
        "isrf_db": ratio_db(p_in, p_out),
        "dsrf_db": ratio_db(x_in, x_out),
    }


def theoretical_metrics(weights, array: SensorArray) -> tuple[float, float]:
    """Broadband directivity factor and white-noise gain (linear).

    ``DF = K / sum_k h^H Gamma h`` and ``WNG = K / sum_k h^H h`` over the
    weight bins, with Gamma the isotropic coherence.
    """
    h = np.asarray(getattr(weights, "values", weights))
    bins = getattr(weights, "bins", np.arange(len(h)))
    gamma = isotropic_pseudocov(array, bins).matrices
    diffuse = np.einsum("km,kmn,kn->", h.conj(), gamma, h).real
    white = np.sum(np.abs(h) ** 2)
    k = len(h)
    return k / diffuse, k / white


def _azimuth(value) -> tuple[float, float]:
    if isinstance(value, DoA):
        return value.azimuth, value.elevation
    return float(value), 0.0


def angular_error(estimate, truth) -> float:
    """Angle between two directions in degrees, in ``[0, 180]``.

    Accepts DoA instances or azimuths in radians.
    """
    a = DoA(*_azimuth(estimate)).unit_vector
    b = DoA(*_azimuth(truth)).unit_vector
    return math.degrees(math.acos(float(np.clip(a @ b, -1.0, 1.0))))


def to_db(value: float) -> float:
    if value <= 0:
        return -math.inf
    return 10.0 * math.log10(value)


@dataclass(frozen=True)
class BoxplotStats:
    """Quantiles of a sample at 9, 25, 50, 75 and 91 percent."""

    p9: float
    p25: float
    p50: float
    p75: float
    p91: float
    count: int = 0

    def as_tuple(self) -> tuple[float, ...]:
        return (self.p9, self.p25, self.p50, self.p75, self.p91)


def boxplot_stats(samples) -> BoxplotStats:
    """Linearly interpolated quantiles; infinities are clamped to the dB limit.

    Raises:
        EmptySampleError: If no finite-or-infinite sample is given.
    """
    values = np.asarray(list(samples), dtype=np.float64).ravel()
    values = values[~np.isnan(values)]
    if values.size == 0:
        raise EmptySampleError("Cannot compute statistics of an empty sample")
    values = np.clip(values, -defaults.db_limit, defaults.db_limit)
    quantiles = np.percentile(values, defaults.boxplot_percentiles, method="linear")
    return BoxplotStats(*(float(q) for q in quantiles), count=int(values.size))


METRIC_FIELDS: tuple[str, ...] = (
    "gsnr_db",
    "gsir_db",
    "isrf_db",
    "dsrf_db",
    "df_db",
    "wng_db",
    "doa_error_deg",
    "estimated_azimuth_deg",
)
"""tuple[str, ...]: Metric columns of the metrics CSV."""

PARAMETER_FIELDS: tuple[str, ...] = (
    "t60_ms",
    "desired_distance",
    "interferer_distance",
    "sir_db",
    "scr_db",
    "interferer_azimuth",
)
"""tuple[str, ...]: Scenario parameter columns of the metrics CSV."""

CSV_FIELDS: tuple[str, ...] = (
    ("scenario_id",) + PARAMETER_FIELDS + ("method",) + METRIC_FIELDS + ("infinite",)
)


@dataclass(frozen=True)
class EnhancementReport:
    """Metrics of one method on one scenario.

    Enhancement fields are None for DoA-only methods.
    """

    scenario_id: str
    method: str
    parameters: dict[str, float] = field(default_factory=dict)
    gsnr_db: float | None = None
    gsir_db: float | None = None
    isrf_db: float | None = None
    dsrf_db: float | None = None
    df_db: float | None = None
    wng_db: float | None = None
    doa_error_deg: float | None = None
    estimated_azimuth_deg: float | None = None

    @property
    def infinite(self) -> bool:
        return any(
            value is not None and math.isinf(value)
            for value in (getattr(self, name) for name in METRIC_FIELDS)
        )

    def row(self) -> dict[str, str]:
        """CSV row with infinities clamped to the dB limit."""
        row = {"scenario_id": self.scenario_id, "method": self.method}
        for name in PARAMETER_FIELDS:
            value = self.parameters.get(name)
            row[name] = "" if value is None else f"{float(value):g}"
        for name in METRIC_FIELDS:
            row[name] = _format(getattr(self, name))
        row["infinite"] = str(int(self.infinite))
        return row


def _format(value: float | None) -> str:
    if value is None:
        return ""
    clamped = min(max(float(value), -defaults.db_limit), defaults.db_limit)
    return f"{clamped:.6f}"


def build_report(
    scenario_id: str,
    method: str,
    parameters: dict[str, float],
    *,
    components: FilteredComponents | None = None,
    weights=None,
    array: SensorArray | None = None,
    estimate: DoA | None = None,
    truth: DoA | None = None,
) -> EnhancementReport:
    """Assemble a report from whatever a method produced."""
    values: dict[str, float] = {}
    if components is not None:
        values.update(enhancement_metrics(components))
    if weights is not None and array is not None:
        df, wng = theoretical_metrics(weights, array)
        values["df_db"] = to_db(df)
        values["wng_db"] = to_db(wng)
    if estimate is not None:
        values["estimated_azimuth_deg"] = estimate.azimuth_deg
        if truth is not None:
            values["doa_error_deg"] = angular_error(estimate, truth)
    return EnhancementReport(
        scenario_id=scenario_id, method=method, parameters=dict(parameters), **values
    )


def write_metrics_csv(path: Path, reports) -> Path:
    """Write reports sorted by scenario id and method.

    Raises:
        MetricsError: If the file cannot be written.
    """
    rows = sorted((r.row() for r in reports), key=lambda r: (r["scenario_id"], r["method"]))
    return write_rows(path, rows, CSV_FIELDS)


def write_rows(path: Path, rows, fields) -> Path:
    """Atomically write dictionaries as CSV.

    Raises:
        MetricsError: If the file cannot be written.
    """
    try:
        with atomic_path(Path(path)) as temporary:
            with open(temporary, "w", newline="", encoding="utf-8") as fp:
                writer = csv.DictWriter(fp, fieldnames=list(fields), lineterminator="\n")
                writer.writeheader()
                writer.writerows(rows)
    except OSError as e:
        raise MetricsError(f"An error occurred: {e}") from e
    return Path(path)


def read_rows(path: Path) -> list[dict[str, str]]:
    """Read a CSV file into dictionaries.

    Raises:
        MetricsError: If the file is missing or unreadable.
    """
    path = Path(path)
    if not path.exists():
        raise MetricsError(f"File not found at {path}")
    try:
        with open(path, newline="", encoding="utf-8") as fp:
            return list(csv.DictReader(fp))
    except (OSError, csv.Error) as e:
        raise MetricsError(f"An error occurred: {e}") from e


__all__ = [
    "CSV_FIELDS",
    "INTERFERENCE_COMPONENTS",
    "METRIC_FIELDS",
    "NOISE_COMPONENTS",
    "PARAMETER_FIELDS",
    "BoxplotStats",
    "EnhancementReport",
    "FilteredComponents",
    "angular_error",
    "boxplot_stats",
    "build_report",
    "enhancement_metrics",
    "filter_components",
    "ratio_db",
    "read_rows",
    "theoretical_metrics",
    "to_db",
    "write_metrics_csv",
    "write_rows",
]
