"""Observed and modeled covariance matrices.

This module provides the per-bin sample covariance of STFT frames, the
:class:`BinCovarianceSet` bundling the observed matrices with the four
pseudo-normalized model components, and the assembly of the modeled
observed covariance and of the noise covariance matrix (NCM) from a set
of variances.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Self

import numpy as np

from .. import defaults
from ..exceptions import (
    EmptyFramesError,
    EstimationError,
    MissingInterfererError,
    NegativeVarianceError,
)
from ..geometry import (
    ArrayDocument,
    CovarianceKind,
    DoA,
    PseudoCovariance,
    SensorArray,
    directional_pseudocov,
    isotropic_pseudocov,
    steering_vector,
    white_pseudocov,
)
from ..spectral import SpectralFrames
from ..storage import read_matrices, write_matrices

logger = logging.getLogger(__name__)


def sample_covariance(frames: SpectralFrames | np.ndarray) -> np.ndarray:
    """Per-bin sample covariance ``R_y[k] = (1/L) sum_l y[l, k] y[l, k]^H``.

    Args:
        frames: SpectralFrames or a raw ``(M, L, K)`` tensor.

    Returns:
        np.ndarray: ``(K, M, M)`` Hermitian PSD matrices.

    Raises:
        EmptyFramesError: If there are no frames.
    """
    data = frames.data if isinstance(frames, SpectralFrames) else np.asarray(frames)
    n_frames = data.shape[1]
    if n_frames == 0:
        raise EmptyFramesError("Cannot estimate a covariance from zero frames")
    covariance = np.einsum("mlk,nlk->kmn", data, data.conj()) / n_frames
    # Exact Hermitian symmetry, independent of einsum summation order.
    return 0.5 * (covariance + covariance.conj().transpose(0, 2, 1))


@dataclass(frozen=True, eq=False)
class VarianceVector:
    """Per-bin variances ``(x, p, gamma, v)``.

    Attributes:
        values: ``(K, 4)`` variances in spectral power units.
        bins: ``(K,)`` bin indices.
    """

    values: np.ndarray
    bins: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != len(CovarianceKind):
            raise EstimationError(f"Variances must be (K, 4), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise EstimationError("Variances must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "bins", np.asarray(self.bins, dtype=np.int64))

    def component(self, kind: CovarianceKind) -> np.ndarray:
        return self.values[:, kind.index]

    @property
    def desired(self) -> np.ndarray:
        return self.component(CovarianceKind.DESIRED)

    @property
    def interferer(self) -> np.ndarray:
        return self.component(CovarianceKind.INTERFERER)

    @property
    def isotropic(self) -> np.ndarray:
        return self.component(CovarianceKind.ISOTROPIC)

    @property
    def white(self) -> np.ndarray:
        return self.component(CovarianceKind.WHITE)


@dataclass(frozen=True, eq=False)
class NoiseCovariance:
    """Per-bin noise covariance matrix.

    Attributes:
        matrices: ``(K, M, M)`` Hermitian PSD matrices.
        epsilon: Regularizer included on the diagonal.
        bins: ``(K,)`` bin indices.
    """

    matrices: np.ndarray
    epsilon: float
    bins: np.ndarray

    def export(
        self, stem: Path, variances: VarianceVector | None = None
    ) -> tuple[Path, Path]:
        """Write the NCM, and optionally the variances it came from, to a sidecar pair.

        Raises:
            MatrixFileWriteError: If writing fails (from write_matrices).
        """
        arrays = {"ncm": self.matrices}
        if variances is not None:
            arrays["variances"] = variances.values
        return write_matrices(
            stem, arrays, {"epsilon": self.epsilon, "bins": self.bins.tolist()}
        )

    @classmethod
    def load(cls, stem: Path) -> Self:
        """Read an NCM written by :meth:`export`.

        Raises:
            MatrixFileLoadError: If the files are missing or malformed
                (from read_matrices).
        """
        arrays, metadata = read_matrices(stem)
        return cls(
            matrices=arrays["ncm"],
            epsilon=float(metadata["epsilon"]),
            bins=np.asarray(metadata["bins"]),
        )


def _variance_values(sigma: VarianceVector | np.ndarray, n_bins: int) -> np.ndarray:
    values = sigma.values if isinstance(sigma, VarianceVector) else np.asarray(sigma)
    values = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if values.shape[0] == 1:
        values = np.broadcast_to(values, (n_bins, values.shape[1]))
    if np.any(values < 0):
        raise NegativeVarianceError(
            f"Variances must be non-negative, minimum is {values.min():.3e}"
        )
    return values


@dataclass(frozen=True, eq=False)
class BinCovarianceSet:
    """Observed covariances together with the model components, per bin.

    Attributes:
        array: Sensor array the matrices belong to.
        observed: ``(K, M, M)`` observed covariances R_y.
        desired: Desired pseudo-covariance d d^H.
        isotropic: Isotropic pseudo-covariance.
        white: White (identity) pseudo-covariance.
        epsilon: Regularizer; ``adjusted = observed - epsilon I``.
        bins: ``(K,)`` bin indices of the rows.
        desired_doa: Known desired direction.
        interferer: Interferer pseudo-covariance b b^H, once a direction is set.
        interferer_doa: Direction of ``interferer``.
    """

    array: SensorArray
    observed: np.ndarray
    desired: PseudoCovariance
    isotropic: PseudoCovariance
    white: PseudoCovariance
    epsilon: float
    bins: np.ndarray
    desired_doa: DoA
    interferer: PseudoCovariance | None = None
    interferer_doa: DoA | None = None

    @classmethod
    def from_observed(
        cls,
        observed: np.ndarray,
        array: SensorArray,
        desired_doa: DoA,
        *,
        epsilon: float = defaults.epsilon,
        bins=None,
        interferer_doa: DoA | None = None,
    ) -> Self:
        """Build a set from observed covariances.

        Args:
            observed: ``(K, M, M)`` observed matrices, one per entry of ``bins``.
            array: Sensor array.
            desired_doa: Known desired direction.
            epsilon: Regularizer.
            bins: Bin indices of the rows; ``0..K-1`` when None.
            interferer_doa: Optional interferer direction to attach.

        Raises:
            EstimationError: If shapes disagree with the array or the bins.
        """
        observed = np.asarray(observed, dtype=np.complex128)
        bins = np.arange(len(observed)) if bins is None else np.asarray(bins)
        m = array.n_sensors
        if observed.shape != (len(bins), m, m):
            raise EstimationError(
                f"Observed matrices of shape {observed.shape} do not match "
                f"{len(bins)} bins and {m} sensors"
            )
        comps = cls(
            array=array,
            observed=observed,
            desired=directional_pseudocov(
                steering_vector(array, desired_doa, bins), CovarianceKind.DESIRED
            ),
            isotropic=isotropic_pseudocov(array, bins),
            white=white_pseudocov(array, bins),
            epsilon=float(epsilon),
            bins=bins,
            desired_doa=desired_doa,
        )
        logger.debug(f"Built covariance set with {len(bins)} bins and {m} sensors")
        return comps.with_interferer(interferer_doa) if interferer_doa else comps

    @classmethod
    def from_frames(
        cls,
        frames: SpectralFrames,
        array: SensorArray,
        desired_doa: DoA,
        *,
        epsilon: float = defaults.epsilon,
    ) -> Self:
        """Build a set from multichannel STFT frames over all bins.

        Raises:
            EmptyFramesError: If there are no frames (from sample_covariance).
            EstimationError: If the frames do not match the array.
        """
        return cls.from_observed(
            sample_covariance(frames), array, desired_doa, epsilon=epsilon
        )

    @property
    def n_bins(self) -> int:
        return len(self.bins)

    @property
    def n_sensors(self) -> int:
        return self.array.n_sensors

    @property
    def adjusted(self) -> np.ndarray:
        """``R_{y,eps} = R_y - eps I``."""
        return self.observed - self.epsilon * np.eye(self.n_sensors)

    def interferer_for(self, doa: DoA) -> PseudoCovariance:
        return directional_pseudocov(
            steering_vector(self.array, doa, self.bins), CovarianceKind.INTERFERER
        )

    def with_interferer(self, doa: DoA) -> Self:
        """Return a copy with the interferer component steered to ``doa``."""
        return replace(self, interferer=self.interferer_for(doa), interferer_doa=doa)

    def select(self, bins) -> Self:
        """Restrict the set to a subset of its bins.

        Raises:
            EstimationError: If a requested bin is not in the set.
        """
        bins = np.asarray(bins, dtype=np.int64)
        lookup = {int(b): i for i, b in enumerate(self.bins)}
        try:
            rows = np.array([lookup[int(b)] for b in bins], dtype=np.int64)
        except KeyError as e:
            raise EstimationError(f"Bin {e.args[0]} is not part of this set") from e

        def take(pc: PseudoCovariance | None) -> PseudoCovariance | None:
            if pc is None:
                return None
            return PseudoCovariance(kind=pc.kind, matrices=pc.matrices[rows], bins=bins)

        return replace(
            self,
            observed=self.observed[rows],
            desired=take(self.desired),
            isotropic=take(self.isotropic),
            white=take(self.white),
            interferer=take(self.interferer),
            bins=bins,
        )

    def components(self) -> np.ndarray:
        """Model components stacked in solver order, shape ``(4, K, M, M)``.

        Raises:
            MissingInterfererError: If no interferer direction is set.
        """
        if self.interferer is None:
            raise MissingInterfererError("The interferer component is not set")
        return np.stack(
            [
                self.desired.matrices,
                self.interferer.matrices,
                self.isotropic.matrices,
                self.white.matrices,
            ]
        )

    def export(self, stem: Path) -> tuple[Path, Path]:
        """Write the set to a matrix sidecar pair.

        Raises:
            MatrixFileWriteError: If writing fails (from write_matrices).
        """
        arrays = {
            "observed": self.observed,
            "desired": self.desired.matrices,
            "isotropic": self.isotropic.matrices,
            "white": self.white.matrices,
        }
        if self.interferer is not None:
            arrays["interferer"] = self.interferer.matrices
        metadata = {
            "bins": self.bins.tolist(),
            "epsilon": self.epsilon,
            "array": self.array.to_document(),
            "desired_doa": [self.desired_doa.azimuth, self.desired_doa.elevation],
            "interferer_doa": (
                [self.interferer_doa.azimuth, self.interferer_doa.elevation]
                if self.interferer_doa
                else None
            ),
        }
        return write_matrices(stem, arrays, metadata)

    @classmethod
    def load(cls, stem: Path) -> Self:
        """Read a set written by :meth:`export`, recomputing the model components.

        Raises:
            MatrixFileLoadError: If the files are missing or malformed
                (from read_matrices).
        """
        arrays, metadata = read_matrices(stem)
        array = ArrayDocument.model_validate(metadata["array"]).to_array()
        interferer = metadata.get("interferer_doa")
        return cls.from_observed(
            arrays["observed"],
            array,
            DoA(*metadata["desired_doa"]),
            epsilon=metadata["epsilon"],
            bins=np.asarray(metadata["bins"]),
            interferer_doa=DoA(*interferer) if interferer else None,
        )


def model_covariance(
    sigma: VarianceVector | np.ndarray,
    comps: BinCovarianceSet,
    epsilon: float | None = None,
) -> np.ndarray:
    """Modeled observed covariance ``sum_z sigma_z R_z + eps I`` per bin.

    Args:
        sigma: ``(K, 4)`` variances in (x, p, gamma, v) order.
        comps: Covariance set with the interferer component attached.
        epsilon: Regularizer; the set's own value when None.

    Returns:
        np.ndarray: ``(K, M, M)`` modeled covariances.

    Raises:
        NegativeVarianceError: If any variance is negative.
        MissingInterfererError: If the interferer is not set (from components).
    """
    values = _variance_values(sigma, comps.n_bins)
    epsilon = comps.epsilon if epsilon is None else epsilon
    return np.einsum("kz,zkmn->kmn", values, comps.components()) + epsilon * np.eye(
        comps.n_sensors
    )


def assemble_ncm(
    sigma: VarianceVector | np.ndarray,
    comps: BinCovarianceSet,
    epsilon: float | None = None,
) -> NoiseCovariance:
    """Noise covariance ``sigma_p R_p + sigma_gamma R_gamma + sigma_v I + eps I``.

    The desired component is excluded.

    Raises:
        NegativeVarianceError: If any variance is negative.
        MissingInterfererError: If the interferer is not set (from components).
    """
    values = _variance_values(sigma, comps.n_bins).copy()
    values[:, CovarianceKind.DESIRED.index] = 0.0
    epsilon = comps.epsilon if epsilon is None else epsilon
    matrices = np.einsum("kz,zkmn->kmn", values, comps.components()) + epsilon * np.eye(
        comps.n_sensors
    )
    return NoiseCovariance(matrices=matrices, epsilon=epsilon, bins=comps.bins)


__all__ = [
    "BinCovarianceSet",
    "NoiseCovariance",
    "VarianceVector",
    "assemble_ncm",
    "model_covariance",
    "sample_covariance",
]
