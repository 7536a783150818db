"""Spectral package for time-frequency processing.

This package provides STFT analysis with periodic Hamming windows at 50%
overlap, overlap-add synthesis, and per-bin application of beamformer
weights.
"""

from .stft import (
    SpectralFrames,
    StftConfig,
    apply_weights,
    filter_signal,
    istft,
    stft,
)

__all__ = [
    "SpectralFrames",
    "StftConfig",
    "apply_weights",
    "filter_signal",
    "istft",
    "stft",
]
