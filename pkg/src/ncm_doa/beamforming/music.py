"""Narrowband MUSIC baseline with broadband phasor averaging.

Each bin's observed covariance is eigendecomposed; the eigenvectors beyond
the assumed source count span the noise subspace and the pseudospectrum is
``1 / ||E_n^H d(theta)||^2`` over an azimuth grid. The interferer of a bin
is the largest pseudospectrum peak outside the exclusion cone around the
desired direction. Per-bin picks are combined by a circular mean, either
unweighted (MSC) or weighted by the pseudospectrum at each pick (wMSC).
"""

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from .. import defaults
from ..exceptions import NoNoiseSubspaceError, NoValidBinsError
from ..geometry import DoA, SensorArray, angular_distance, steering_grid, wrap_angle
from ..storage import atomic_path

logger = logging.getLogger(__name__)


def azimuth_grid(step: float = defaults.music_grid_step) -> np.ndarray:
    """Azimuths covering ``(-pi, pi]`` with the given spacing, ending at pi."""
    count = int(round(2.0 * math.pi / step))
    return np.arange(1, count + 1) * (2.0 * math.pi / count) - math.pi


@dataclass(frozen=True, eq=False)
class MusicSpectrum:
    """Per-bin pseudospectra.

    Attributes:
        values: ``(K, G)`` positive pseudospectrum values.
        azimuths: ``(G,)`` grid in radians.
        bins: ``(K,)`` bin indices.
        sources: Assumed source count.
        noise_dimensions: ``(K,)`` noise-subspace size used per bin.
    """

    values: np.ndarray
    azimuths: np.ndarray
    bins: np.ndarray
    sources: int
    noise_dimensions: np.ndarray

    def row(self, k: int) -> np.ndarray:
        """Pseudospectrum of bin index ``k``."""
        return self.values[int(np.flatnonzero(self.bins == k)[0])]


def _phase_fixed(vectors: np.ndarray) -> np.ndarray:
    lead = np.argmax(np.abs(vectors) > 1e-12, axis=0)
    pivots = vectors[lead, np.arange(vectors.shape[1])]
    phases = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    return vectors / phases


def noise_subspace(covariance: np.ndarray, sources: int) -> np.ndarray:
    """Noise-subspace basis of one Hermitian matrix.

    Eigenvalues are sorted in descending order and each eigenvector's first
    non-zero entry is made real positive. The signal subspace keeps at most
    ``sources`` eigenvalues that lie above the noise floor.

    Raises:
        NoNoiseSubspaceError: If ``sources`` is not smaller than the sensor count.
    """
    m = covariance.shape[-1]
    if sources >= m:
        raise NoNoiseSubspaceError(
            f"Source count {sources} leaves no noise subspace with {m} sensors"
        )
    eigenvalues, vectors = np.linalg.eigh(covariance)
    eigenvalues = eigenvalues[::-1]
    vectors = _phase_fixed(vectors[:, ::-1])
    floor = eigenvalues[-1] + abs(eigenvalues[-1]) * defaults.music_floor_tolerance
    effective = min(sources, int(np.sum(eigenvalues > floor)))
    return vectors[:, effective:]


def music_spectrum(
    ry: np.ndarray,
    array: SensorArray,
    *,
    bins=None,
    azimuths: np.ndarray | None = None,
    sources: int = defaults.music_sources,
) -> MusicSpectrum:
    """MUSIC pseudospectra of every bin.

    Args:
        ry: ``(K, M, M)`` observed covariances, or a single ``(M, M)`` matrix.
        array: Sensor array.
        bins: Bin indices of the rows; ``0..K-1`` when None.
        azimuths: Grid; 1 degree spacing over ``(-180, 180]`` when None.
        sources: Assumed source count.

    Returns:
        MusicSpectrum: Pseudospectra.

    Raises:
        NoNoiseSubspaceError: If ``sources >= M`` (from noise_subspace).
    """
    ry = np.asarray(ry, dtype=np.complex128)
    if ry.ndim == 2:
        ry = ry[None]
    bins = np.arange(len(ry)) if bins is None else np.atleast_1d(np.asarray(bins))
    azimuths = azimuth_grid() if azimuths is None else np.asarray(azimuths)
    grid = steering_grid(array, azimuths, bins)

    values = np.empty((len(bins), len(azimuths)))
    dimensions = np.empty(len(bins), dtype=np.int64)
    for i, matrix in enumerate(ry):
        basis = noise_subspace(matrix, sources)
        projection = grid[i] @ basis.conj()
        norm = np.sum(np.abs(projection) ** 2, axis=-1)
        values[i] = 1.0 / np.maximum(norm, np.finfo(np.float64).tiny)
        dimensions[i] = basis.shape[1]
    logger.debug(f"Computed MUSIC pseudospectra for {len(bins)} bins")
    return MusicSpectrum(
        values=values,
        azimuths=azimuths,
        bins=bins,
        sources=sources,
        noise_dimensions=dimensions,
    )


@dataclass(frozen=True)
class PeakSelection:
    """Interferer pick of one bin.

    Attributes:
        azimuth: Selected azimuth, or None when no admissible peak exists.
        weight: Pseudospectrum value at the pick (0 when invalid).
    """

    azimuth: float | None
    weight: float = 0.0

    @property
    def valid(self) -> bool:
        return self.azimuth is not None


def circular_peaks(row: np.ndarray) -> np.ndarray:
    """Indices of local maxima of a spectrum on a circular grid."""
    padded = np.concatenate([row[-1:], row, row[:1]])
    peaks, _ = find_peaks(padded)
    return peaks - 1


def select_interferer(
    row: np.ndarray,
    azimuths: np.ndarray,
    desired: DoA | float,
    separation: float = defaults.music_separation,
) -> PeakSelection:
    """Largest local maximum at least ``separation`` away from the desired azimuth."""
    desired_azimuth = getattr(desired, "azimuth", desired)
    peaks = circular_peaks(row)
    admissible = peaks[
        angular_distance(azimuths[peaks], desired_azimuth) >= separation - 1e-12
    ]
    if len(admissible) == 0:
        return PeakSelection(azimuth=None)
    best = admissible[np.argmax(row[admissible])]
    return PeakSelection(azimuth=float(azimuths[best]), weight=float(row[best]))


@dataclass(frozen=True, eq=False)
class BroadbandDoaEstimate:
    """Circular mean of per-bin picks.

    Attributes:
        azimuth: Mean azimuth in ``(-pi, pi]``.
        per_bin: ``(K,)`` picks, NaN for invalid bins.
        weights: ``(K,)`` weights used, 0 for invalid bins.
        method: ``"MSC"`` or ``"wMSC"``.
    """

    azimuth: float
    per_bin: np.ndarray
    weights: np.ndarray
    method: str

    @property
    def doa(self) -> DoA:
        return DoA(self.azimuth)

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.per_bin)


def phasor_average(
    azimuths, weights=None, method: str | None = None
) -> BroadbandDoaEstimate:
    """Angle of the (weighted) phasor sum ``sum_k w_k exp(i theta_k)``.

    Non-finite azimuths mark invalid bins and are excluded.

    Raises:
        NoValidBinsError: If no bin is valid or every valid weight is zero.
    """
    azimuths = np.asarray(azimuths, dtype=np.float64)
    valid = np.isfinite(azimuths)
    if weights is None:
        used = valid.astype(np.float64)
        method = method or "MSC"
    else:
        used = np.where(valid, np.asarray(weights, dtype=np.float64), 0.0)
        method = method or "wMSC"
    if not np.any(valid) or not np.any(used > 0):
        raise NoValidBinsError("No valid bins to average")
    total = np.sum(used[valid] * np.exp(1j * azimuths[valid]))
    return BroadbandDoaEstimate(
        azimuth=float(wrap_angle(np.angle(total))),
        per_bin=np.where(valid, azimuths, np.nan),
        weights=used,
        method=method,
    )


@dataclass(frozen=True, eq=False)
class MusicResult:
    """Output of :meth:`MusicEstimator.estimate`."""

    spectrum: MusicSpectrum
    selections: list[PeakSelection]
    msc: BroadbandDoaEstimate
    wmsc: BroadbandDoaEstimate


@dataclass(frozen=True)
class MusicEstimator:
    """MUSIC baseline bundled with its parameters.

    Attributes:
        array: Sensor array.
        sources: Assumed source count.
        grid_step: Azimuth grid spacing in radians.
        separation: Minimum pick separation from the desired azimuth.
        min_frequency: Bins below this frequency are not averaged.
    """

    array: SensorArray
    sources: int = defaults.music_sources
    grid_step: float = defaults.music_grid_step
    separation: float = defaults.music_separation
    min_frequency: float = defaults.music_min_frequency

    def estimate(self, ry: np.ndarray, desired: DoA, bins=None) -> MusicResult:
        """Estimate the interferer azimuth with both averages.

        Raises:
            NoNoiseSubspaceError: If the source count is too large.
            NoValidBinsError: If no bin yields an admissible peak.
        """
        spectrum = music_spectrum(
            ry,
            self.array,
            bins=bins,
            azimuths=azimuth_grid(self.grid_step),
            sources=self.sources,
        )
        usable = self.array.bin_frequency(spectrum.bins) >= self.min_frequency
        selections = [
            select_interferer(row, spectrum.azimuths, desired, self.separation)
            if ok
            else PeakSelection(azimuth=None)
            for row, ok in zip(spectrum.values, usable, strict=True)
        ]
        picks = np.array([s.azimuth if s.valid else np.nan for s in selections])
        weights = np.array([s.weight for s in selections])
        invalid = int(np.sum(~np.isfinite(picks)))
        if invalid:
            logger.debug(f"{invalid} of {len(picks)} bins have no admissible peak")
        return MusicResult(
            spectrum=spectrum,
            selections=selections,
            msc=phasor_average(picks, method="MSC"),
            wmsc=phasor_average(picks, weights, method="wMSC"),
        )


def write_spectrum_csv(path: Path, spectrum: MusicSpectrum) -> Path:
    """Write ``bin, angle_deg, value`` rows for plotting.

    Raises:
        OSError: If the file cannot be written.
    """
    with atomic_path(Path(path)) as temporary:
        with open(temporary, "w", newline="", encoding="utf-8") as fp:
            writer = csv.writer(fp)
            writer.writerow(["bin", "angle_deg", "value"])
            degrees = np.degrees(spectrum.azimuths)
            for k, row in zip(spectrum.bins, spectrum.values, strict=True):
                for angle, value in zip(degrees, row, strict=True):
                    writer.writerow([int(k), f"{angle:.6g}", f"{value:.9e}"])
    return Path(path)


__all__ = [
    "BroadbandDoaEstimate",
    "MusicEstimator",
    "MusicResult",
    "MusicSpectrum",
    "PeakSelection",
    "azimuth_grid",
    "circular_peaks",
    "music_spectrum",
    "noise_subspace",
    "phasor_average",
    "select_interferer",
    "write_spectrum_csv",
]
