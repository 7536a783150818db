"""Spherically isotropic noise and late reverberation.

Both fields are sums of plane waves from directions drawn uniformly on the
sphere; averaged over directions their spatial coherence approaches
``sinc(2 f r / c)``.
"""

import logging
import math

import numpy as np
from scipy.signal import fftconvolve, get_window

from .. import defaults
from ..geometry import SensorArray
from .propagation import random_directions, spectral_plane_waves

logger = logging.getLogger(__name__)


def diffuse_field(
    array: SensorArray,
    n_samples: int,
    rng: np.random.Generator,
    *,
    directions: int = defaults.diffuse_directions,
    block: int = defaults.diffuse_block,
) -> np.ndarray:
    """Unit-variance spherically isotropic noise, shape ``(M, n_samples)``.

    Independent blocks of plane-wave noise, each with freshly drawn
    directions, are tapered with a square-root periodic Hann window and
    overlap-added at 50% so the output variance is stationary.
    """
    hop = block // 2
    taper = np.sqrt(get_window("hann", block, fftbins=True))
    count = math.ceil(n_samples / hop) + 1
    output = np.zeros((array.n_sensors, (count + 1) * hop))
    for index in range(count):
        units = random_directions(directions, rng)
        noise = rng.standard_normal((directions, block))
        rendered = spectral_plane_waves(noise, array, units) / math.sqrt(directions)
        output[:, index * hop : index * hop + block] += rendered * taper
    logger.debug(f"Rendered {count} diffuse blocks on {array.n_sensors} sensors")
    # The first half block carries a single taper; skip it.
    return output[:, hop : hop + n_samples]


def t60_ratio_db(t60_ms: float, distance: float | None = None) -> float:
    """Diffuse-to-direct energy ratio standing in for reverberation time.

    ``14.70 log10(T60 / ms) - 44.68``, which is -5 dB at 500 ms, -2 dB at
    800 ms and minus infinity when anechoic. Passing ``distance`` adds
    ``20 log10(distance / m)`` for the distance-dependent variant.
    """
    if t60_ms <= 0:
        return -math.inf
    ratio = 14.70 * math.log10(t60_ms) - 44.68
    if distance is not None:
        ratio += 20.0 * math.log10(distance)
    return ratio


def decay_tail(
    t60_ms: float, rng: np.random.Generator, rate: float = defaults.sampling_rate
) -> np.ndarray:
    """Exponentially decaying noise impulse response (60 dB over ``t60_ms``)."""
    length = max(int(t60_ms * 1e-3 * rate), 1)
    t = np.arange(length) / rate
    return rng.standard_normal(length) * np.exp(-3.0 * math.log(10.0) * t / (t60_ms * 1e-3))


def reverberant_tail(
    signal: np.ndarray,
    array: SensorArray,
    t60_ms: float,
    rng: np.random.Generator,
    *,
    directions: int = defaults.diffuse_directions,
) -> np.ndarray:
    """Late reverberation of a source as an isotropic field, shape ``(M, T)``.

    Each of ``directions`` fixed random plane waves carries the source
    convolved with its own decaying noise tail. The result is not
    calibrated; callers scale it to the wanted ratio. Anechoic rooms give zeros.
    """
    n = len(signal)
    if t60_ms <= 0:
        return np.zeros((array.n_sensors, n))
    units = random_directions(directions, rng)
    tails = np.stack([decay_tail(t60_ms, rng, array.sampling_rate) for _ in units])
    carried = fftconvolve(signal[None, :], tails, axes=-1)[:, :n]
    pad = tails.shape[-1]
    padded = np.pad(carried, ((0, 0), (0, pad)))
    return spectral_plane_waves(padded, array, units)[:, :n]


__all__ = ["decay_tail", "diffuse_field", "reverberant_tail", "t60_ratio_db"]
