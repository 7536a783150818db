"""Default parameters for ncm-doa.

This module collects the numerical constants shared by the estimator,
the beamformers, the simulator and the command-line harness. Every value
can be overridden through the corresponding configuration object.
"""

import math

wave_speed: float = 343.0
"""float: Speed of sound in m/s."""

sampling_rate: int = 16000
"""int: Sampling rate in Hz. Audio at any other rate is rejected."""

frame_length: int = 128
"""int: STFT frame length (FFT order). Gives 65 one-sided bins."""

epsilon: float = 1e-4
"""float: White-noise regularizer added to every modeled covariance."""

reference_sensor: int = 0
"""int: Index of the reference sensor."""

hermitian_tolerance: float = 1e-12
"""float: Tolerance for Hermitian and unit-modulus checks."""

condition_limit: float = 1e12
"""float: Condition number above which a normal system is regularized."""

collinearity_limit: float = 1.0 - 1e-12
"""float: Normalized Gram entry at which two model components are duplicates."""

regularization_scale: float = 1e-10
"""float: Diagonal loading, relative to trace(A)/4, for ill-conditioned systems."""

descent_step: float = 0.05
"""float: Initial (and maximum) line-search step in radians."""

descent_contraction: float = 0.5
"""float: Backtracking contraction factor."""

descent_armijo: float = 1e-4
"""float: Armijo sufficient-decrease constant."""

descent_min_step: float = 1e-10
"""float: Step below which the line search gives up."""

descent_tolerance: float = 1e-6
"""float: Gradient tolerance, relative to the summed squared norm of R_y."""

descent_max_iterations: int = 200
"""int: Iteration cap for a single descent run."""

joint_max_outer: int = 60
"""int: Iteration cap for the alternating variance / DoA scheme."""

joint_inner_iterations: int = 5
"""int: Descent steps per alternation."""

multi_starts: int = 8
"""int: Equally spaced azimuth starts used when no initial guess is given."""

exclusion_radius: float = math.radians(5.0)
"""float: Minimum interferer-to-desired azimuth separation in radians."""

low_confidence_ratio: float = 1e-12
"""float: Interferer power share below which an estimate is low-confidence."""

estimation_min_bin: int = 1
"""int: First bin of the estimation band. Bin 0 is rank-deficient."""

collision_threshold: float = 1e-6
"""float: Smallest singular value of C, relative to sqrt(M), for a collision."""

music_sources: int = 2
"""int: Assumed source count for the MUSIC signal subspace."""

music_grid_step: float = math.radians(1.0)
"""float: MUSIC azimuth grid spacing in radians."""

music_separation: float = math.radians(5.0)
"""float: Minimum peak separation from the desired azimuth in radians."""

music_min_frequency: float = 100.0
"""float: Bins below this frequency (Hz) are excluded from averaging."""

music_floor_tolerance: float = 1e-9
"""float: Relative distance from the smallest eigenvalue treated as noise floor."""

diffuse_directions: int = 64
"""int: Random plane-wave directions per diffuse-field block."""

diffuse_block: int = 1024
"""int: Diffuse-field block length in samples."""

fractional_delay_taps: int = 64
"""int: Length of the windowed-sinc fractional-delay filter."""

ring_sources: int = 8
"""int: Number of correlated sources on the ring."""

ring_radius: float = 1.0
"""float: Ring radius in meters."""

white_level_db: float = -30.0
"""float: Sensor noise level relative to the desired direct path in dB."""

scenario_duration: float = 4.0
"""float: Default scenario duration in seconds."""

db_limit: float = 120.0
"""float: Magnitude at which infinite dB values are clamped in CSV output."""

boxplot_percentiles: tuple[float, ...] = (9.0, 25.0, 50.0, 75.0, 91.0)
"""tuple[float, ...]: Quantiles reported by boxplot statistics."""

workers_env: str = "NCM_DOA_WORKERS"
"""str: Environment variable holding the sweep worker count."""

run_config_version: int = 1
"""int: Supported run configuration schema version."""


__all__ = [
    "boxplot_percentiles",
    "collinearity_limit",
    "collision_threshold",
    "condition_limit",
    "db_limit",
    "descent_armijo",
    "descent_contraction",
    "descent_max_iterations",
    "descent_min_step",
    "descent_step",
    "descent_tolerance",
    "diffuse_block",
    "diffuse_directions",
    "epsilon",
    "estimation_min_bin",
    "exclusion_radius",
    "fractional_delay_taps",
    "frame_length",
    "hermitian_tolerance",
    "joint_inner_iterations",
    "joint_max_outer",
    "low_confidence_ratio",
    "multi_starts",
    "music_floor_tolerance",
    "music_grid_step",
    "music_min_frequency",
    "music_separation",
    "music_sources",
    "reference_sensor",
    "regularization_scale",
    "ring_radius",
    "ring_sources",
    "run_config_version",
    "sampling_rate",
    "scenario_duration",
    "wave_speed",
    "white_level_db",
    "workers_env",
]
