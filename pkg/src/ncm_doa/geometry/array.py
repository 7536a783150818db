"""Sensor arrays and source directions.

This module provides the immutable :class:`SensorArray` and :class:`DoA`
types, the rectangular and linear array constructors, the named array
presets and the JSON geometry loader.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .. import defaults
from ..exceptions import (
    ConfigLoadError,
    InvalidArrayError,
    InvalidDoaError,
    UnknownPresetError,
)
from ..storage import read_json
from ..suggest import did_you_mean

logger = logging.getLogger(__name__)


def wrap_angle(angle):
    """Wrap angles (scalar or array) into ``(-pi, pi]``."""
    wrapped = np.mod(np.asarray(angle, dtype=np.float64) + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped <= -np.pi, wrapped + 2.0 * np.pi, wrapped)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def angular_distance(a, b):
    """Absolute azimuth difference, accounting for wraparound. Range ``[0, pi]``."""
    return np.abs(wrap_angle(np.asarray(a) - np.asarray(b)))


@dataclass(frozen=True)
class DoA:
    """Direction of arrival in radians.

    Attributes:
        azimuth: Azimuth, wrapped into ``(-pi, pi]`` on construction.
        elevation: Elevation in ``[-pi/2, pi/2]``.
    """

    azimuth: float
    elevation: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)):
            raise InvalidDoaError(
                f"Non-finite direction ({self.azimuth}, {self.elevation})"
            )
        if abs(self.elevation) > math.pi / 2 + 1e-12:
            raise InvalidDoaError(f"Elevation {self.elevation} outside [-pi/2, pi/2]")
        object.__setattr__(self, "azimuth", wrap_angle(float(self.azimuth)))
        object.__setattr__(
            self, "elevation", min(max(float(self.elevation), -math.pi / 2), math.pi / 2)
        )

    @classmethod
    def from_degrees(cls, azimuth: float, elevation: float = 0.0) -> "DoA":
        return cls(math.radians(azimuth), math.radians(elevation))

    @property
    def azimuth_deg(self) -> float:
        return math.degrees(self.azimuth)

    @property
    def elevation_deg(self) -> float:
        return math.degrees(self.elevation)

    @property
    def unit_vector(self) -> np.ndarray:
        """Cartesian unit vector ``(cos e cos a, cos e sin a, sin e)``."""
        return np.array(
            [
                math.cos(self.elevation) * math.cos(self.azimuth),
                math.cos(self.elevation) * math.sin(self.azimuth),
                math.sin(self.elevation),
            ]
        )

    def moved(self, d_azimuth: float, d_elevation: float = 0.0) -> "DoA":
        """Return a direction offset by the given angles, elevation clamped."""
        elevation = min(max(self.elevation + d_elevation, -math.pi / 2), math.pi / 2)
        return DoA(self.azimuth + d_azimuth, elevation)


@dataclass(frozen=True, eq=False)
class SensorArray:
    """An array of omnidirectional sensors with its sampling parameters.

    Attributes:
        positions: ``(M, 3)`` Cartesian sensor positions in meters.
        reference: Index of the reference sensor.
        sampling_rate: Sampling rate f0 in Hz.
        bins: Number K of one-sided frequency bins; the FFT order is 2(K-1).
        wave_speed: Propagation speed c in m/s.
        name: Optional preset name, used in manifests.
    """

    positions: np.ndarray
    reference: int = defaults.reference_sensor
    sampling_rate: float = float(defaults.sampling_rate)
    bins: int = defaults.frame_length // 2 + 1
    wave_speed: float = defaults.wave_speed
    name: str | None = None

    def __post_init__(self):
        positions = np.array(self.positions, dtype=np.float64)
        if positions.ndim != 2 or positions.shape[1] not in (2, 3):
            raise InvalidArrayError(
                f"Sensor positions must be an (M, 3) array, got shape {positions.shape}"
            )
        if positions.shape[1] == 2:
            positions = np.column_stack([positions, np.zeros(len(positions))])
        if len(positions) < 2:
            raise InvalidArrayError("An array needs at least 2 sensors")
        if not np.all(np.isfinite(positions)):
            raise InvalidArrayError("Sensor positions must be finite")
        if not 0 <= self.reference < len(positions):
            raise InvalidArrayError(
                f"Reference index {self.reference} out of range for {len(positions)} sensors"
            )
        if not self.sampling_rate > 0:
            raise InvalidArrayError(
                f"Sampling rate must be positive, got {self.sampling_rate}"
            )
        if self.bins < 2:
            raise InvalidArrayError(f"Bin count must be at least 2, got {self.bins}")
        if not self.wave_speed > 0:
            raise InvalidArrayError(
                f"Wave speed must be positive, got {self.wave_speed}"
            )
        positions.setflags(write=False)
        object.__setattr__(self, "positions", positions)
        logger.debug(f"Created SensorArray with {len(positions)} sensors")

    @property
    def n_sensors(self) -> int:
        return len(self.positions)

    @property
    def n_fft(self) -> int:
        """FFT order N = 2(K-1)."""
        return 2 * (self.bins - 1)

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Bin center frequencies ``k * f0 / N`` for ``k = 0..K-1``."""
        return np.arange(self.bins) * self.sampling_rate / self.n_fft

    def bin_frequency(self, k) -> np.ndarray | float:
        return np.asarray(k) * self.sampling_rate / self.n_fft

    @cached_property
    def offsets(self) -> np.ndarray:
        """Sensor positions relative to the reference sensor."""
        return self.positions - self.positions[self.reference]

    def _rank(self) -> int:
        centered = self.positions - self.positions.mean(axis=0)
        singular = np.linalg.svd(centered, compute_uv=False)
        if singular[0] == 0:
            return 0
        return int(np.sum(singular > 1e-9 * singular[0]))

    @property
    def is_planar(self) -> bool:
        """True when every sensor lies in a horizontal plane."""
        return bool(np.ptp(self.positions[:, 2]) < 1e-12)

    @property
    def is_collinear(self) -> bool:
        return self._rank() <= 1

    @cached_property
    def axis(self) -> np.ndarray:
        """Unit direction of a collinear array.

        Raises:
            InvalidArrayError: If the array is not collinear.
        """
        if not self.is_collinear:
            raise InvalidArrayError("Array axis is only defined for collinear arrays")
        centered = self.positions - self.positions.mean(axis=0)
        _, _, vt = np.linalg.svd(centered)
        axis = vt[0]
        # Orient so that the first non-zero component is positive.
        lead = axis[np.argmax(np.abs(axis) > 1e-12)]
        return axis if lead > 0 else -axis

    def with_bins(self, bins: int) -> "SensorArray":
        return replace(self, bins=bins)

    def to_document(self) -> dict:
        """Return the JSON geometry document describing this array."""
        return {
            "sensors": self.positions.tolist(),
            "reference": self.reference,
            "f0": self.sampling_rate,
            "bins": self.bins,
            "c": self.wave_speed,
        }


def ula(n_sensors: int, spacing: float, **kwargs) -> SensorArray:
    """Uniform linear array along the x axis, reference at the origin."""
    positions = np.zeros((n_sensors, 3))
    positions[:, 0] = np.arange(n_sensors) * spacing
    return SensorArray(positions, **kwargs)


def ura(rows: int, cols: int, spacing: float, **kwargs) -> SensorArray:
    """Uniform rectangular array in the horizontal plane.

    Sensors are numbered row by row, ``cols`` along x and ``rows`` along y,
    with the reference (index 0 by default) at the origin corner.
    """
    xs, ys = np.meshgrid(np.arange(cols) * spacing, np.arange(rows) * spacing)
    positions = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(rows * cols)])
    return SensorArray(positions, **kwargs)


ARRAY_PRESETS: dict[str, Callable[[], SensorArray]] = {
    "ura-4x4": lambda: ura(4, 4, 0.02, name="ura-4x4"),
    "ura-8x2": lambda: ura(2, 8, 0.02, name="ura-8x2"),
}
"""dict: Named arrays; 4x4 and eccentric 8x2 grids with 2 cm spacing."""


def array_preset(name: str) -> SensorArray:
    """Build a named array preset.

    Raises:
        UnknownPresetError: If ``name`` is not registered.
    """
    try:
        return ARRAY_PRESETS[name]()
    except KeyError:
        raise UnknownPresetError(
            f"Unknown array preset {name!r}." + did_you_mean(name, ARRAY_PRESETS)
        ) from None


class ArrayDocument(BaseModel):
    """JSON geometry document.

    Example:
        ``{"sensors": [[0, 0, 0], [0.02, 0, 0]], "reference": 0,
        "f0": 16000, "bins": 65, "c": 343.0}``
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    sensors: list[tuple[float, float, float]] = Field(min_length=2)
    reference: int = Field(default=defaults.reference_sensor, ge=0)
    f0: float = Field(default=float(defaults.sampling_rate), gt=0)
    bins: int = Field(default=defaults.frame_length // 2 + 1, ge=2)
    c: float = Field(default=defaults.wave_speed, gt=0)

    def to_array(self, name: str | None = None) -> SensorArray:
        return SensorArray(
            np.array(self.sensors),
            reference=self.reference,
            sampling_rate=self.f0,
            bins=self.bins,
            wave_speed=self.c,
            name=name,
        )


def load_array(source: str | Path) -> SensorArray:
    """Load an array from a preset name or a JSON geometry document.

    Args:
        source: Preset name (e.g. ``"ura-4x4"``) or path to a JSON file.

    Returns:
        SensorArray: The loaded array.

    Raises:
        ConfigLoadError: If the file is missing, malformed or describes an
            invalid array. This wraps pydantic.ValidationError and InvalidArrayError.
        UnknownPresetError: If ``source`` is neither a preset nor an existing file.
    """
    if str(source) in ARRAY_PRESETS:
        return array_preset(str(source))
    path = Path(source)
    if not path.exists() and path.suffix != ".json":
        return array_preset(str(source))
    document = read_json(path)
    try:
        return ArrayDocument.model_validate(document).to_array(name=path.stem)
    except (ValidationError, InvalidArrayError) as e:
        raise ConfigLoadError(f"Invalid array geometry in {path}: {e}") from e


__all__ = [
    "ARRAY_PRESETS",
    "ArrayDocument",
    "DoA",
    "SensorArray",
    "angular_distance",
    "array_preset",
    "load_array",
    "ula",
    "ura",
    "wrap_angle",
]
