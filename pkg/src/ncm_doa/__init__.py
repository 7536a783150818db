"""ncm-doa - Joint interferer direction and noise covariance estimation.

This library estimates the direction of arrival of a directional
interferer together with the noise covariance matrix of a multichannel
sound field, fitting a four-component covariance model (desired,
interferer, isotropic and white noise) to the observed STFT covariances.
The estimates drive LCMV and MVDR beamformers, compared against an
LCMP beamformer steered by a MUSIC baseline on simulated desk scenes.

Main Classes:
    SensorArray: Microphone positions with sampling and STFT parameters.
    BinCovarianceSet: Observed covariances with the model components.
    JointEstimate: Interferer direction, variances and noise covariance.
    BeamformerWeights: Per-bin weights of LCMV, MVDR or LCMP beamformers.
    MusicEstimator: Narrowband MUSIC with the MSC and wMSC averages.
    ScenarioConfig: One point of the evaluation grid.

Example:
    >>> from ncm_doa import ScenarioConfig, synthesize, stft, StftConfig
    >>> from ncm_doa import BinCovarianceSet, joint_estimate
    >>> signals = synthesize(ScenarioConfig(interferer_azimuth=50.0, duration=2.0))
    >>> frames = stft(signals.mixture, StftConfig())
    >>> comps = BinCovarianceSet.from_frames(frames, signals.array, signals.desired_doa)
    >>> estimate = joint_estimate(comps)
    >>> print(f"{estimate.doa.azimuth_deg:.1f} deg")
"""

import logging

from .beamforming import (
    BeamformerMethod,
    BeamformerWeights,
    ConstraintSet,
    MusicEstimator,
    lcmp,
    lcmv,
    mvdr,
)
from .estimation import (
    BinCovarianceSet,
    DescentConfig,
    EstimatorConfig,
    JointEstimate,
    NoiseCovariance,
    VarianceVector,
    descend_doa,
    joint_estimate,
    solve_nonnegative,
)
from .evaluation import EnhancementReport, build_report, report
from .exceptions import ConfigError, EstimationError, StageError
from .geometry import DoA, SensorArray, load_array, steering_vector
from .simulation import ScenarioConfig, ScenarioSignals, synthesize
from .spectral import StftConfig, istft, stft

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "BeamformerMethod",
    "BeamformerWeights",
    "BinCovarianceSet",
    "ConfigError",
    "ConstraintSet",
    "DescentConfig",
    "DoA",
    "EnhancementReport",
    "EstimationError",
    "EstimatorConfig",
    "JointEstimate",
    "MusicEstimator",
    "NoiseCovariance",
    "ScenarioConfig",
    "ScenarioSignals",
    "SensorArray",
    "StageError",
    "StftConfig",
    "VarianceVector",
    "build_report",
    "descend_doa",
    "istft",
    "joint_estimate",
    "lcmp",
    "lcmv",
    "load_array",
    "mvdr",
    "report",
    "solve_nonnegative",
    "steering_vector",
    "stft",
    "synthesize",
]
