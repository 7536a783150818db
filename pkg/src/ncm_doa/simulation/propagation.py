"""Plane-wave and point-source propagation onto an array.

Sensor ``m`` receives a wave from direction ``u`` delayed by
``u . (p_m - p_ref) / c`` seconds, matching the steering vector phase
convention. Direct paths use windowed-sinc fractional delays; diffuse
contributions are shifted in the frequency domain.
"""

import logging

import numpy as np
from scipy.signal import fftconvolve

from .. import defaults
from ..exceptions import InvalidScenarioError
from ..geometry import DoA, SensorArray

logger = logging.getLogger(__name__)


def blackman(t: np.ndarray, length: float) -> np.ndarray:
    """Continuous Blackman window of the given length, centered at 0."""
    x = 2.0 * np.pi * t / length
    window = 0.42 + 0.5 * np.cos(x) + 0.08 * np.cos(2.0 * x)
    return np.where(np.abs(t) <= length / 2, window, 0.0)


def fractional_delay_filter(
    delay: float, taps: int = defaults.fractional_delay_taps
) -> np.ndarray:
    """Windowed-sinc filter delaying by ``delay`` samples around its center tap.

    The filter is meant to be applied as ``fftconvolve(x, h)[c:c + len(x)]``
    with ``c = taps // 2``; ``|delay|`` should stay well below ``c``.
    """
    center = taps // 2
    t = np.arange(taps) - center - delay
    return np.sinc(t) * blackman(t, taps)


def delay_signal(
    signal: np.ndarray, delay: float, taps: int = defaults.fractional_delay_taps
) -> np.ndarray:
    """Delay a signal by a (fractional) number of samples, keeping its length."""
    whole = int(np.round(delay))
    kernel = fractional_delay_filter(delay - whole, taps)
    center = taps // 2
    shifted = fftconvolve(signal, kernel)[center : center + len(signal)]
    if whole > 0:
        shifted = np.concatenate([np.zeros(whole), shifted[:-whole]])
    elif whole < 0:
        shifted = np.concatenate([shifted[-whole:], np.zeros(-whole)])
    return shifted


def sensor_delays(array: SensorArray, units: np.ndarray) -> np.ndarray:
    """Delays in seconds, ``(M, D)`` for ``(D, 3)`` unit vectors."""
    return array.offsets @ np.atleast_2d(units).T / array.wave_speed


def plane_wave(signal: np.ndarray, array: SensorArray, doa: DoA) -> np.ndarray:
    """Render a far-field source on every sensor, shape ``(M, T)``."""
    delays = sensor_delays(array, doa.unit_vector)[:, 0] * array.sampling_rate
    return np.stack([delay_signal(signal, d) for d in delays])


def point_source(
    signal: np.ndarray, array: SensorArray, position: np.ndarray
) -> np.ndarray:
    """Render a near-field source at ``position`` (m), shape ``(M, T)``.

    Spherical-wave counterpart of :func:`plane_wave` with the same sign
    convention: sensor ``m`` is delayed by ``(|s - p_ref| - |s - p_m|) / c``
    and scaled by ``|s - p_ref| / |s - p_m|``. The reference channel
    carries the signal unchanged.

    Raises:
        InvalidScenarioError: If the source sits on a sensor.
    """
    offsets = array.positions - np.asarray(position, dtype=np.float64)
    ranges = np.linalg.norm(offsets, axis=1)
    if np.any(ranges <= 0):
        raise InvalidScenarioError(f"Source at {position} coincides with a sensor")
    reference = ranges[array.reference]
    delays = (reference - ranges) / array.wave_speed * array.sampling_rate
    gains = reference / ranges
    return np.stack([g * delay_signal(signal, d) for g, d in zip(gains, delays)])


def random_directions(count: int, rng: np.random.Generator) -> np.ndarray:
    """Unit vectors drawn uniformly on the sphere, shape ``(count, 3)``."""
    z = rng.uniform(-1.0, 1.0, count)
    azimuth = rng.uniform(-np.pi, np.pi, count)
    radius = np.sqrt(1.0 - z**2)
    return np.column_stack([radius * np.cos(azimuth), radius * np.sin(azimuth), z])


def spectral_plane_waves(
    signals: np.ndarray, array: SensorArray, units: np.ndarray
) -> np.ndarray:
    """Sum of plane waves, each delayed by a frequency-domain phase shift.

    Args:
        signals: ``(D, T)`` waveforms, one per direction.
        array: Sensor array.
        units: ``(D, 3)`` arrival directions.

    Returns:
        np.ndarray: ``(M, T)`` circularly delayed sum over directions.
    """
    n = signals.shape[-1]
    spectra = np.fft.rfft(signals, axis=-1)
    frequencies = np.fft.rfftfreq(n, d=1.0 / array.sampling_rate)
    delays = sensor_delays(array, units)
    output = np.empty((array.n_sensors, n))
    for m in range(array.n_sensors):
        phases = np.exp(-2j * np.pi * np.outer(delays[m], frequencies))
        output[m] = np.fft.irfft(np.sum(spectra * phases, axis=0), n=n)
    return output


__all__ = [
    "blackman",
    "delay_signal",
    "fractional_delay_filter",
    "plane_wave",
    "point_source",
    "random_directions",
    "sensor_delays",
    "spectral_plane_waves",
]
