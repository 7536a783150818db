"""Relative geometry, steering vectors and pseudo-normalized covariances.

All quantities are expressed relative to the reference sensor. A plane
wave arriving from direction ``u`` reaches sensor ``m`` with the delay
``u . (p_m - p_ref) / c``, so the steering entry is
``exp(-2j pi f_k u . (p_m - p_ref) / c)``. For the pair ``[i, j]`` the
relative geometry describes the vector ``p_j - p_i``; with that convention
the closed form of the interferer pseudo-covariance for pair ``[i, j]`` is
entry ``(j, i)`` of ``b b^H``.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..exceptions import DegenerateGeometryError
from .array import DoA, SensorArray, wrap_angle

logger = logging.getLogger(__name__)


class CovarianceKind(Enum):
    """Model components of the observed covariance, in solver order.

    Each enum value contains a tuple of (code, display_name, description).
    """

    DESIRED = ("x", "desired", "Desired source direct path")
    INTERFERER = ("p", "interferer", "Interfering source direct path")
    ISOTROPIC = ("gamma", "isotropic", "Spherically isotropic diffuse field")
    WHITE = ("v", "white", "Spatially white sensor noise")

    @property
    def code(self) -> str:
        return self.value[0]

    @property
    def display_name(self) -> str:
        return self.value[1]

    @property
    def description(self) -> str:
        return self.value[2]

    @property
    def index(self) -> int:
        """Position of this component in variance vectors."""
        return list(type(self)).index(self)

    @classmethod
    def from_code(cls, code: str) -> "CovarianceKind | None":
        """Find a component by its code or display name (case-insensitive).

        Args:
            code: Code such as ``"p"`` or name such as ``"interferer"``.

        Returns:
            CovarianceKind | None: Matching component or None if not found.
        """
        code_lower = code.lower()
        for kind in cls:
            if code_lower in (kind.code, kind.display_name):
                return kind
        return None


@dataclass(frozen=True)
class RelativeGeometry:
    """Pairwise spherical coordinates of ``p_j - p_i``, indexed ``[i, j]``.

    Attributes:
        distance: ``(M, M)`` pair distances r in meters.
        azimuth: ``(M, M)`` pair azimuths psi in ``(-pi, pi]``.
        elevation: ``(M, M)`` pair elevations lambda.
    """

    distance: np.ndarray
    azimuth: np.ndarray
    elevation: np.ndarray

    def upper_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Indices ``(i, j)`` of the pairs with ``i < j``."""
        return np.triu_indices(self.distance.shape[0], k=1)


@dataclass(frozen=True)
class SteeringVector:
    """Per-bin relative frequency responses from the reference sensor.

    Attributes:
        doa: Direction the vector steers to.
        values: ``(K, M)`` complex unit-modulus entries.
        bins: ``(K,)`` bin indices the rows correspond to.
    """

    doa: DoA
    values: np.ndarray
    bins: np.ndarray


@dataclass(frozen=True)
class PseudoCovariance:
    """Per-bin unit-diagonal structural covariance of one model component.

    Attributes:
        kind: Which model component this is.
        matrices: ``(K, M, M)`` Hermitian matrices.
        bins: ``(K,)`` bin indices.
    """

    kind: CovarianceKind
    matrices: np.ndarray
    bins: np.ndarray


def _bin_indices(array: SensorArray, bins) -> np.ndarray:
    if bins is None:
        return np.arange(array.bins)
    return np.atleast_1d(np.asarray(bins, dtype=np.int64))


def relative_geometry(
    array: SensorArray, *, allow_coincident: bool = False
) -> RelativeGeometry:
    """Compute pairwise distances, azimuths and elevations.

    Args:
        array: Sensor array.
        allow_coincident: Accept distinct sensors sharing a position.

    Returns:
        RelativeGeometry: Coordinates of ``p_j - p_i`` for every pair ``[i, j]``.

    Raises:
        DegenerateGeometryError: If two distinct sensors coincide and
            ``allow_coincident`` is False.
    """
    vectors = array.offsets[None, :, :] - array.offsets[:, None, :]
    distance = np.linalg.norm(vectors, axis=-1)
    off_diagonal = ~np.eye(array.n_sensors, dtype=bool)
    if not allow_coincident and np.any(distance[off_diagonal] < 1e-12):
        i, j = np.argwhere((distance < 1e-12) & off_diagonal)[0]
        raise DegenerateGeometryError(f"Sensors {i} and {j} share the same position")
    azimuth = wrap_angle(np.arctan2(vectors[..., 1], vectors[..., 0]))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(distance > 0, vectors[..., 2] / distance, 0.0)
    elevation = np.arcsin(np.clip(ratio, -1.0, 1.0))
    return RelativeGeometry(distance=distance, azimuth=azimuth, elevation=elevation)


def steering_vector(
    array: SensorArray, doa: DoA, bins: int | Sequence[int] | None = None
) -> SteeringVector:
    """Steering vector of a far-field plane wave.

    Entry ``m`` of bin ``k`` equals
    ``exp(-2j pi f_k r_m (cos phi cos lambda_m cos(theta - psi_m) + sin phi sin lambda_m) / c)``,
    which reduces to ``r_m cos(theta - psi_m) cos(phi - lambda_m)`` whenever the
    source or the sensor lies in the horizontal plane of the reference.

    Args:
        array: Sensor array.
        doa: Source direction.
        bins: Bin indices; all bins when None.

    Returns:
        SteeringVector: ``(K, M)`` responses, exactly 1 at the reference sensor.
    """
    bins = _bin_indices(array, bins)
    projection = array.offsets @ doa.unit_vector
    frequencies = array.bin_frequency(bins)
    phase = -2.0 * np.pi * np.outer(frequencies, projection) / array.wave_speed
    return SteeringVector(doa=doa, values=np.exp(1j * phase), bins=bins)


def steering_grid(
    array: SensorArray,
    azimuths: np.ndarray,
    bins: int | Sequence[int] | None = None,
    elevation: float = 0.0,
) -> np.ndarray:
    """Steering vectors for a grid of azimuths at one elevation.

    Returns:
        np.ndarray: ``(K, G, M)`` responses.
    """
    bins = _bin_indices(array, bins)
    azimuths = np.asarray(azimuths, dtype=np.float64)
    units = np.stack(
        [
            np.cos(elevation) * np.cos(azimuths),
            np.cos(elevation) * np.sin(azimuths),
            np.full_like(azimuths, np.sin(elevation)),
        ],
        axis=-1,
    )
    projection = units @ array.offsets.T
    frequencies = array.bin_frequency(bins)
    phase = (
        -2.0
        * np.pi
        * frequencies[:, None, None]
        * projection[None, :, :]
        / array.wave_speed
    )
    return np.exp(1j * phase)


def directional_pseudocov(
    sv: SteeringVector, kind: CovarianceKind = CovarianceKind.INTERFERER
) -> PseudoCovariance:
    """Rank-1 pseudo-covariance ``sv sv^H`` per bin."""
    matrices = np.einsum("km,kn->kmn", sv.values, sv.values.conj())
    return PseudoCovariance(kind=kind, matrices=matrices, bins=sv.bins)


def isotropic_pseudocov(
    array: SensorArray, bins: int | Sequence[int] | None = None
) -> PseudoCovariance:
    """Spherically isotropic field coherence ``sinc(2 pi f_k r_ij / c)``.

    Coincident sensors are accepted and get coherence 1.
    """
    bins = _bin_indices(array, bins)
    distance = np.linalg.norm(
        array.positions[:, None, :] - array.positions[None, :, :], axis=-1
    )
    frequencies = array.bin_frequency(bins)
    # np.sinc is the normalized sinc, sin(pi x) / (pi x).
    matrices = np.sinc(
        2.0 * frequencies[:, None, None] * distance[None, :, :] / array.wave_speed
    ).astype(np.complex128)
    return PseudoCovariance(kind=CovarianceKind.ISOTROPIC, matrices=matrices, bins=bins)


def white_pseudocov(
    array: SensorArray, bins: int | Sequence[int] | None = None
) -> PseudoCovariance:
    """Identity pseudo-covariance of spatially white noise."""
    bins = _bin_indices(array, bins)
    matrices = np.broadcast_to(
        np.eye(array.n_sensors, dtype=np.complex128),
        (len(bins), array.n_sensors, array.n_sensors),
    ).copy()
    return PseudoCovariance(kind=CovarianceKind.WHITE, matrices=matrices, bins=bins)


__all__ = [
    "CovarianceKind",
    "PseudoCovariance",
    "RelativeGeometry",
    "SteeringVector",
    "directional_pseudocov",
    "isotropic_pseudocov",
    "relative_geometry",
    "steering_grid",
    "steering_vector",
    "white_pseudocov",
]
