"""Beamforming package for spatial filters and the MUSIC baseline.

This package provides LCMV, MVDR and LCMP weights built from the
estimated noise covariance or the observed covariance, delay-and-sum
references, and the narrowband MUSIC interferer estimator with its two
broadband averages.
"""

from .beamformers import (
    RESPONSE,
    BeamformerMethod,
    BeamformerWeights,
    CollisionPolicy,
    ConstraintSet,
    MvdrForm,
    delay_and_sum,
    lcmp,
    lcmv,
    mvdr,
    steered_power,
)
from .music import (
    BroadbandDoaEstimate,
    MusicEstimator,
    MusicResult,
    MusicSpectrum,
    PeakSelection,
    azimuth_grid,
    circular_peaks,
    music_spectrum,
    noise_subspace,
    phasor_average,
    select_interferer,
    write_spectrum_csv,
)

__all__ = [
    "RESPONSE",
    "BeamformerMethod",
    "BeamformerWeights",
    "BroadbandDoaEstimate",
    "CollisionPolicy",
    "ConstraintSet",
    "MusicEstimator",
    "MusicResult",
    "MusicSpectrum",
    "MvdrForm",
    "PeakSelection",
    "azimuth_grid",
    "circular_peaks",
    "delay_and_sum",
    "lcmp",
    "lcmv",
    "music_spectrum",
    "mvdr",
    "noise_subspace",
    "phasor_average",
    "select_interferer",
    "steered_power",
    "write_spectrum_csv",
]
