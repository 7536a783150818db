"""Exception classes for ncm-doa.

This module defines all custom exceptions raised by the library, grouped
by the concern they belong to: geometry, spectral processing, file I/O,
estimation, beamforming, simulation, evaluation and configuration.
"""


class GeometryError(Exception):
    """Base exception for sensor-array and direction errors."""

    pass


class InvalidArrayError(GeometryError):
    """Raised when a sensor array violates its construction invariants."""

    pass


class DegenerateGeometryError(GeometryError):
    """Raised when two distinct sensors share the same position."""

    pass


class InvalidDoaError(GeometryError):
    """Raised when a direction has a non-finite or out-of-range angle."""

    pass


class SpectralError(Exception):
    """Base exception for STFT analysis, synthesis and filtering errors."""

    pass


class StftConfigError(SpectralError):
    """Raised when frame length, hop or bin count are inconsistent."""

    pass


class ChannelLengthError(SpectralError):
    """Raised when the channels of a multichannel signal differ in length."""

    pass


class SignalTooShortError(SpectralError):
    """Raised when a signal is shorter than one analysis frame."""

    pass


class DimensionMismatchError(SpectralError):
    """Raised when weights and frames disagree on bins or sensors."""

    pass


class AudioFileError(Exception):
    """Base exception for WAV reading and writing."""

    pass


class UnsupportedSampleRateError(AudioFileError):
    """Raised when a WAV file is not sampled at the supported rate."""

    pass


class CannotReadAudioError(AudioFileError):
    """Raised when a WAV file is missing or cannot be decoded."""

    pass


class CannotWriteAudioError(AudioFileError):
    """Raised when a WAV file cannot be written."""

    pass


class MatrixFileError(Exception):
    """Base exception for the binary+JSON complex matrix format."""

    pass


class MatrixFileLoadError(MatrixFileError):
    """Raised when a matrix sidecar is missing, truncated or malformed."""

    pass


class MatrixFileWriteError(MatrixFileError):
    """Raised when a matrix sidecar cannot be written."""

    pass


class EstimationError(Exception):
    """Base exception for covariance modeling and joint estimation."""

    pass


class EmptyFramesError(EstimationError):
    """Raised when a covariance is requested from zero frames."""

    pass


class NegativeVarianceError(EstimationError):
    """Raised when a modeled covariance is assembled from negative variances."""

    pass


class DegenerateSystemError(EstimationError):
    """Raised when the variance normal system is singular."""

    pass


class MissingInterfererError(EstimationError):
    """Raised when an operation needs the interferer component but none is set."""

    pass


class BeamformerError(Exception):
    """Base exception for beamformer weight computation."""

    pass


class ConstraintCollisionError(BeamformerError):
    """Raised when the desired and interferer constraints are collinear."""

    pass


class MusicError(Exception):
    """Base exception for the MUSIC baseline."""

    pass


class NoNoiseSubspaceError(MusicError):
    """Raised when the assumed source count leaves no noise subspace."""

    pass


class NoValidBinsError(MusicError):
    """Raised when no bin produced an admissible interferer peak."""

    pass


class ScenarioError(Exception):
    """Base exception for scenario synthesis."""

    pass


class AliasingError(ScenarioError):
    """Raised when a synthetic source would contain energy above Nyquist."""

    pass


class InvalidScenarioError(ScenarioError):
    """Raised when a scenario cannot be rendered or imported."""

    pass


class MetricsError(Exception):
    """Base exception for evaluation metrics."""

    pass


class EmptySampleError(MetricsError):
    """Raised when statistics are requested for an empty sample."""

    pass


class ConfigError(Exception):
    """Base exception for configuration problems."""

    pass


class ConfigLoadError(ConfigError):
    """Raised when a JSON document is missing, unreadable or invalid."""

    pass


class ConfigWriteError(ConfigError):
    """Raised when a JSON document cannot be written."""

    pass


class UnknownParameterError(ConfigError):
    """Raised when a report groups by a parameter that does not exist."""

    pass


class UnknownPresetError(ConfigError):
    """Raised when a grid, array or method name is not registered."""

    pass


class StageError(Exception):
    """Raised when a pipeline stage fails for a scenario.

    Attributes:
        scenario_id: Identifier of the failing scenario.
        stage: Name of the failing stage.
    """

    def __init__(self, scenario_id: str, stage: str, message: str):
        super().__init__(f"[{scenario_id}] {stage}: {message}")
        self.scenario_id = scenario_id
        self.stage = stage
        self.message = message

    def __reduce__(self):
        return type(self), (self.scenario_id, self.stage, self.message)
