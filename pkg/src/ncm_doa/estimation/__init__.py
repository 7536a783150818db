"""Estimation package for the covariance model and the joint estimator.

This package provides the per-bin covariance model, the non-negative
variance solver, and the alternating scheme that estimates the interferer
direction together with the noise covariance matrix.
"""

from .covariance import (
    BinCovarianceSet,
    NoiseCovariance,
    VarianceVector,
    assemble_ncm,
    model_covariance,
    sample_covariance,
)
from .doa import (
    DescentConfig,
    DescentResult,
    EstimatorConfig,
    GradientForm,
    GradientTerms,
    JointEstimate,
    broadband_cost,
    descend_doa,
    doa_gradient,
    gradient_scale,
    gradient_terms,
    joint_estimate,
    reduce_to_azimuth,
    write_trace,
)
from .solver import (
    KINDS,
    ActiveSetState,
    NormalSystem,
    active_histogram,
    build_system,
    build_systems,
    dump_states,
    solve_band,
    solve_nonnegative,
    solve_unconstrained,
)

__all__ = [
    "KINDS",
    "ActiveSetState",
    "BinCovarianceSet",
    "DescentConfig",
    "DescentResult",
    "EstimatorConfig",
    "GradientForm",
    "GradientTerms",
    "JointEstimate",
    "NoiseCovariance",
    "NormalSystem",
    "VarianceVector",
    "active_histogram",
    "assemble_ncm",
    "broadband_cost",
    "build_system",
    "build_systems",
    "descend_doa",
    "doa_gradient",
    "dump_states",
    "gradient_scale",
    "gradient_terms",
    "joint_estimate",
    "model_covariance",
    "reduce_to_azimuth",
    "sample_covariance",
    "solve_band",
    "solve_nonnegative",
    "solve_unconstrained",
    "write_trace",
]
