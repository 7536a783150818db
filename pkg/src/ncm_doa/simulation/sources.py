"""Seedable source signal surrogates.

Speech-like sources are white noise mixed with a jittered glottal pulse
train, shaped by an all-pole (AR(12)) filter whose six pole pairs sit on
formant frequencies, and modulated by a 4 Hz syllabic envelope. Harmonic
sources stand in for music.
"""

import logging
import math
from pathlib import Path
from typing import Literal

import numpy as np
from scipy.signal import lfilter

from .. import defaults
from ..exceptions import AliasingError, InvalidScenarioError
from ..storage import read_wav

logger = logging.getLogger(__name__)

Voice = Literal["low", "high"]

VOICES: dict[str, dict] = {
    "low": {
        "pitch": 115.0,
        "formants": (500.0, 1450.0, 2450.0, 3400.0, 4400.0, 5600.0),
        "bandwidths": (80.0, 110.0, 160.0, 220.0, 300.0, 400.0),
        "tilt": 0.0,
    },
    "high": {
        "pitch": 210.0,
        "formants": (620.0, 1800.0, 2900.0, 3950.0, 5000.0, 6300.0),
        "bandwidths": (90.0, 120.0, 170.0, 230.0, 320.0, 420.0),
        "tilt": 0.6,
    },
}
"""dict: Pitch, formant and spectral-tilt settings of the two voice registers."""

SYLLABLE_RATE: float = 4.0
"""float: Syllabic modulation rate in Hz."""


def formant_filter(
    formants, bandwidths, rate: float = defaults.sampling_rate
) -> np.ndarray:
    """Denominator coefficients of an all-pole filter with the given resonances."""
    radius = np.exp(-np.pi * np.asarray(bandwidths) / rate)
    angle = 2.0 * np.pi * np.asarray(formants) / rate
    poles = radius * np.exp(1j * angle)
    return np.real(np.poly(np.concatenate([poles, poles.conj()])))


def _normalized(signal: np.ndarray) -> np.ndarray:
    deviation = np.std(signal)
    return signal / deviation if deviation > 0 else signal


def speech_surrogate(
    n_samples: int,
    rng: np.random.Generator,
    *,
    voice: Voice = "low",
    rate: float = defaults.sampling_rate,
) -> np.ndarray:
    """Unit-variance speech-like signal.

    Raises:
        InvalidScenarioError: If ``voice`` is unknown.
    """
    try:
        settings = VOICES[voice]
    except KeyError:
        raise InvalidScenarioError(f"Unknown voice {voice!r}") from None

    period = rate / settings["pitch"]
    pulses = np.zeros(n_samples)
    position = rng.uniform(0, period)
    while position < n_samples:
        pulses[int(position)] = 1.0
        position += period * (1.0 + 0.02 * rng.standard_normal())
    excitation = 0.5 * _normalized(pulses) + rng.standard_normal(n_samples)

    denominator = formant_filter(settings["formants"], settings["bandwidths"], rate)
    shaped = lfilter([1.0], denominator, excitation)
    if settings["tilt"]:
        shaped = lfilter([1.0, -settings["tilt"]], [1.0], shaped)

    t = np.arange(n_samples) / rate
    phase = rng.uniform(0, 2.0 * np.pi)
    envelope = 0.15 + np.sin(np.pi * SYLLABLE_RATE * t + phase) ** 2
    return _normalized(shaped * envelope)


def harmonic_surrogate(
    n_samples: int,
    rng: np.random.Generator,
    *,
    fundamental: float,
    harmonics: int = 16,
    rate: float = defaults.sampling_rate,
) -> np.ndarray:
    """Unit-variance sum of harmonics with ``1/h`` amplitudes and random phases.

    Raises:
        AliasingError: If the highest harmonic reaches the Nyquist frequency.
    """
    if fundamental * harmonics >= rate / 2:
        raise AliasingError(
            f"Harmonic {harmonics} of {fundamental:g} Hz exceeds the Nyquist "
            f"frequency {rate / 2:g} Hz"
        )
    t = np.arange(n_samples) / rate
    orders = np.arange(1, harmonics + 1)
    phases = rng.uniform(0, 2.0 * np.pi, harmonics)
    signal = np.sum(
        np.sin(2.0 * np.pi * fundamental * orders[:, None] * t + phases[:, None])
        / orders[:, None],
        axis=0,
    )
    return _normalized(signal)


def wav_source(path: Path, n_samples: int) -> np.ndarray:
    """First channel of a WAV file, looped or trimmed to ``n_samples``, unit variance.

    Raises:
        UnsupportedSampleRateError: If the file is not at 16 kHz (from read_wav).
        CannotReadAudioError: If the file cannot be read (from read_wav).
    """
    channel = read_wav(path)[0]
    repeats = math.ceil(n_samples / len(channel))
    return _normalized(np.tile(channel, repeats)[:n_samples])


def render_source(
    kind: str,
    n_samples: int,
    rng: np.random.Generator,
    *,
    voice: Voice = "low",
    rate: float = defaults.sampling_rate,
) -> np.ndarray:
    """Render a source by kind: ``speech``, ``harmonic`` or a WAV file path.

    Raises:
        InvalidScenarioError: If the kind is neither a known surrogate nor a WAV path.
    """
    match kind:
        case "speech":
            return speech_surrogate(n_samples, rng, voice=voice, rate=rate)
        case "harmonic":
            fundamental = VOICES[voice]["pitch"] * 1.5
            return harmonic_surrogate(
                n_samples, rng, fundamental=fundamental, harmonics=20, rate=rate
            )
    if kind.lower().endswith(".wav"):
        return wav_source(Path(kind), n_samples)
    raise InvalidScenarioError(
        f"Unknown source kind {kind!r}; expected 'speech', 'harmonic' or a .wav path"
    )


__all__ = [
    "SYLLABLE_RATE",
    "VOICES",
    "Voice",
    "formant_filter",
    "harmonic_surrogate",
    "render_source",
    "speech_surrogate",
    "wav_source",
]
