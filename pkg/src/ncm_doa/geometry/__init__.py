"""Geometry package for sensor arrays and plane-wave models.

This package provides the sensor array and direction types, pairwise
relative geometry, steering vectors, and the pseudo-normalized covariance
matrices of the four model components.
"""

from .array import (
    ARRAY_PRESETS,
    ArrayDocument,
    DoA,
    SensorArray,
    angular_distance,
    array_preset,
    load_array,
    ula,
    ura,
    wrap_angle,
)
from .steering import (
    CovarianceKind,
    PseudoCovariance,
    RelativeGeometry,
    SteeringVector,
    directional_pseudocov,
    isotropic_pseudocov,
    relative_geometry,
    steering_grid,
    steering_vector,
    white_pseudocov,
)

__all__ = [
    "ARRAY_PRESETS",
    "ArrayDocument",
    "CovarianceKind",
    "DoA",
    "PseudoCovariance",
    "RelativeGeometry",
    "SensorArray",
    "SteeringVector",
    "angular_distance",
    "array_preset",
    "directional_pseudocov",
    "isotropic_pseudocov",
    "load_array",
    "relative_geometry",
    "steering_grid",
    "steering_vector",
    "ula",
    "ura",
    "white_pseudocov",
    "wrap_angle",
]
