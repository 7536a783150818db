"""STFT analysis, overlap-add synthesis and per-bin filtering.

Frames use a periodic Hamming window with 50% overlap. Frame ``l`` covers
samples ``[l * hop, l * hop + N)`` and keeps the ``N/2 + 1`` one-sided
bins. Synthesis overlap-adds the inverse transforms and divides by the
window overlap sum, which equals 1.08 on every sample covered by two
frames.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import get_window

from .. import defaults
from ..exceptions import (
    ChannelLengthError,
    DimensionMismatchError,
    SignalTooShortError,
    StftConfigError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StftConfig:
    """STFT parameters.

    Attributes:
        frame_length: Frame length N in samples (even).
        hop: Hop size; must equal N/2.
    """

    frame_length: int = defaults.frame_length
    hop: int | None = None

    def __post_init__(self):
        if self.frame_length < 2 or self.frame_length % 2:
            raise StftConfigError(
                f"Frame length must be even and at least 2, got {self.frame_length}"
            )
        hop = self.frame_length // 2 if self.hop is None else self.hop
        if hop != self.frame_length // 2:
            raise StftConfigError(f"Hop must be N/2 = {self.frame_length // 2}, got {hop}")
        object.__setattr__(self, "hop", hop)

    @classmethod
    def for_bins(cls, bins: int) -> "StftConfig":
        """Config whose one-sided spectrum has ``bins`` bins (N = 2(K-1))."""
        return cls(frame_length=2 * (bins - 1))

    @property
    def bins(self) -> int:
        return self.frame_length // 2 + 1

    @cached_property
    def window(self) -> np.ndarray:
        """Periodic (DFT-even) Hamming window of length N."""
        return get_window("hamming", self.frame_length, fftbins=True)

    def frame_count(self, n_samples: int) -> int:
        return 1 + (n_samples - self.frame_length) // self.hop

    def overlap_sum(self, n_frames: int) -> np.ndarray:
        """Per-sample sum of the windows of ``n_frames`` frames."""
        total = np.zeros((n_frames - 1) * self.hop + self.frame_length)
        for frame in range(n_frames):
            start = frame * self.hop
            total[start : start + self.frame_length] += self.window
        return total


@dataclass(frozen=True, eq=False)
class SpectralFrames:
    """Complex STFT tensor indexed ``[sensor, frame, bin]``.

    Attributes:
        data: ``(M, L, K)`` complex coefficients.
        config: STFT config the frames were produced with.
        n_samples: Length of the analyzed signal, used by synthesis.
    """

    data: np.ndarray
    config: StftConfig
    n_samples: int

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]

    @property
    def n_bins(self) -> int:
        return self.data.shape[2]

    def channel(self, m: int) -> "SpectralFrames":
        return SpectralFrames(self.data[m : m + 1], self.config, self.n_samples)


def _as_channels(signals) -> np.ndarray:
    if isinstance(signals, np.ndarray):
        return np.atleast_2d(signals).astype(np.float64, copy=False)
    channels = [np.asarray(s, dtype=np.float64) for s in signals]
    lengths = {len(c) for c in channels}
    if len(lengths) > 1:
        raise ChannelLengthError(f"Channels differ in length: {sorted(lengths)}")
    return np.vstack(channels)


def stft(
    signals: np.ndarray | Sequence[np.ndarray], config: StftConfig | None = None
) -> SpectralFrames:
    """Short-time Fourier transform of a multichannel signal.

    Args:
        signals: ``(M, T)`` array, a 1-D signal, or a sequence of channels.
        config: STFT parameters; defaults to a 128-sample frame.

    Returns:
        SpectralFrames: ``(M, L, N/2 + 1)`` frames with ``L = 1 + (T - N) // hop``.

    Raises:
        ChannelLengthError: If channels of a sequence differ in length.
        SignalTooShortError: If ``T`` is shorter than one frame.
    """
    config = config or StftConfig()
    samples = _as_channels(signals)
    n_samples = samples.shape[-1]
    if n_samples < config.frame_length:
        raise SignalTooShortError(
            f"Signal of {n_samples} samples is shorter than one "
            f"{config.frame_length}-sample frame"
        )
    frames = sliding_window_view(samples, config.frame_length, axis=-1)[
        :, :: config.hop
    ]
    data = np.fft.rfft(frames * config.window, axis=-1)
    logger.debug(
        f"Analyzed {samples.shape[0]} channels into {data.shape[1]} frames "
        f"of {data.shape[2]} bins"
    )
    return SpectralFrames(data=data, config=config, n_samples=n_samples)


def istft(frames: SpectralFrames, n_samples: int | None = None) -> np.ndarray:
    """Overlap-add synthesis of single-channel frames.

    Args:
        frames: Frames with one channel (or ``(L, K)`` data wrapped in
            SpectralFrames).
        n_samples: Output length; defaults to the analyzed length.

    Returns:
        np.ndarray: Time-domain samples. Samples covered by two frames are
        reconstructed exactly; samples past the last frame are zero.

    Raises:
        DimensionMismatchError: If the frames hold more than one channel or
            their bin count does not match the config.
    """
    data = frames.data
    if data.ndim == 3:
        if data.shape[0] != 1:
            raise DimensionMismatchError(
                f"Synthesis expects one channel, got {data.shape[0]}"
            )
        data = data[0]
    config = frames.config
    if data.shape[-1] != config.bins:
        raise DimensionMismatchError(
            f"Frames have {data.shape[-1]} bins, config expects {config.bins}"
        )
    n_frames = data.shape[0]
    blocks = np.fft.irfft(data, n=config.frame_length, axis=-1)
    output = np.zeros((n_frames - 1) * config.hop + config.frame_length)
    for frame in range(n_frames):
        start = frame * config.hop
        output[start : start + config.frame_length] += blocks[frame]
    overlap = config.overlap_sum(n_frames)
    nonzero = overlap > 1e-12
    output[nonzero] /= overlap[nonzero]

    n_samples = frames.n_samples if n_samples is None else n_samples
    if n_samples > len(output):
        output = np.concatenate([output, np.zeros(n_samples - len(output))])
    return output[:n_samples]


def apply_weights(frames: SpectralFrames, weights) -> SpectralFrames:
    """Filter multichannel frames with per-bin weights: ``out[l, k] = h[k]^H y[:, l, k]``.

    Args:
        frames: ``(M, L, K)`` frames.
        weights: ``(K, M)`` array or an object exposing it as ``values``.

    Returns:
        SpectralFrames: Single-channel ``(1, L, K)`` frames.

    Raises:
        DimensionMismatchError: If bins or sensor counts disagree.
    """
    h = np.asarray(getattr(weights, "values", weights))
    if h.ndim != 2 or h.shape != (frames.n_bins, frames.n_channels):
        raise DimensionMismatchError(
            f"Weights of shape {h.shape} do not match frames with "
            f"{frames.n_bins} bins and {frames.n_channels} sensors"
        )
    data = np.einsum("km,mlk->lk", h.conj(), frames.data)
    return SpectralFrames(data=data[None], config=frames.config, n_samples=frames.n_samples)


def filter_signal(signals: np.ndarray, weights, config: StftConfig) -> np.ndarray:
    """Time-domain output of filtering ``(M, T)`` signals with per-bin weights."""
    return istft(apply_weights(stft(signals, config), weights))


__all__ = [
    "SpectralFrames",
    "StftConfig",
    "apply_weights",
    "filter_signal",
    "istft",
    "stft",
]
