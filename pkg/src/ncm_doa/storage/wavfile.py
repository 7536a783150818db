"""Multichannel WAV input and output.

Signals are exchanged as ``(channels, samples)`` float64 arrays. Files are
read in any PCM 16/24-bit or 32-bit float encoding but must be sampled at
the library's fixed rate; resampling is left to the caller.
"""

import logging
from pathlib import Path

import numpy as np
import soundfile as sf

from .. import defaults
from ..exceptions import (
    CannotReadAudioError,
    CannotWriteAudioError,
    UnsupportedSampleRateError,
)
from .atomic import atomic_path

logger = logging.getLogger(__name__)

SUPPORTED_SUBTYPES = ("PCM_16", "PCM_24", "FLOAT")


def read_wav(path: Path, *, rate: int = defaults.sampling_rate) -> np.ndarray:
    """Read a WAV file into a ``(channels, samples)`` array.

    Args:
        path: File to read.
        rate: Required sampling rate in Hz.

    Returns:
        np.ndarray: Float64 samples, one row per channel.

    Raises:
        CannotReadAudioError: If the file is missing or cannot be decoded.
            This wraps soundfile.LibsndfileError, OSError, RuntimeError.
        UnsupportedSampleRateError: If the file rate differs from ``rate``.
    """
    path = Path(path)
    logger.debug(f"Reading WAV from {path}")
    if not path.exists():
        raise CannotReadAudioError(f"File not found at {path}")
    try:
        data, file_rate = sf.read(path, dtype="float64", always_2d=True)
    except Exception as e:
        raise CannotReadAudioError(f"An error occurred: {e}") from e
    if file_rate != rate:
        raise UnsupportedSampleRateError(
            f"{path} is sampled at {file_rate} Hz, expected {rate} Hz"
        )
    return np.ascontiguousarray(data.T)


def write_wav(
    path: Path,
    signals: np.ndarray,
    *,
    rate: int = defaults.sampling_rate,
    subtype: str = "FLOAT",
) -> Path:
    """Atomically write a ``(channels, samples)`` array to a WAV file.

    Args:
        path: Destination file.
        signals: One row per channel; a 1-D array is written as mono.
        rate: Sampling rate in Hz.
        subtype: One of ``PCM_16``, ``PCM_24`` or ``FLOAT``.

    Returns:
        Path: The written path.

    Raises:
        CannotWriteAudioError: If the subtype is unsupported or writing fails.
            This wraps soundfile.LibsndfileError, OSError, ValueError.
    """
    if subtype not in SUPPORTED_SUBTYPES:
        raise CannotWriteAudioError(f"Unsupported WAV subtype {subtype!r}")
    data = np.atleast_2d(np.asarray(signals, dtype=np.float64)).T
    try:
        with atomic_path(Path(path)) as temporary:
            sf.write(temporary, data, rate, subtype=subtype, format="WAV")
    except Exception as e:
        raise CannotWriteAudioError(f"An error occurred: {e}") from e
    return Path(path)


__all__ = ["SUPPORTED_SUBTYPES", "read_wav", "write_wav"]
