"""Per-bin beamformer weights.

All weights are expressed so that the output of bin ``k`` is
``h[k]^H y[k]``. Linear systems are solved with a Cholesky factorization
of the (noise or observed) covariance instead of an explicit inverse.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Literal, Self

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .. import defaults
from ..exceptions import BeamformerError, ConstraintCollisionError, DimensionMismatchError
from ..geometry import DoA, SensorArray, SteeringVector, steering_grid, steering_vector
from ..storage import read_matrices, write_matrices

logger = logging.getLogger(__name__)

CollisionPolicy = Literal["raise", "distortionless"]
MvdrForm = Literal["standard", "printed"]


class BeamformerMethod(Enum):
    """Beamformer families.

    Each enum value contains a tuple of (code, display_name, description).
    """

    LCMV = ("lcmv", "LCMV", "Linearly constrained minimum variance on the NCM")
    MVDR = ("mvdr", "MVDR", "Minimum variance distortionless response on the NCM")
    LCMP = ("lcmp", "LCMP", "Linearly constrained minimum power on R_y")
    DELAY_AND_SUM = ("ds", "DS", "Delay-and-sum toward the desired direction")

    @property
    def code(self) -> str:
        return self.value[0]

    @property
    def display_name(self) -> str:
        return self.value[1]

    @property
    def description(self) -> str:
        return self.value[2]

    @classmethod
    def from_code(cls, code: str) -> "BeamformerMethod | None":
        code_lower = code.lower()
        for method in cls:
            if code_lower in (method.code, method.display_name.lower()):
                return method
        return None


RESPONSE = np.array([1.0, 0.0], dtype=np.complex128)
"""np.ndarray: Constraint responses (pass desired, null interferer)."""


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Per-bin constraint matrices ``C = [d | b]``.

    Attributes:
        desired: Desired steering vector d.
        interferer: Interferer steering vector b.
    """

    desired: SteeringVector
    interferer: SteeringVector

    def __post_init__(self):
        if self.desired.values.shape != self.interferer.values.shape:
            raise DimensionMismatchError(
                f"Steering vectors of shape {self.desired.values.shape} and "
                f"{self.interferer.values.shape} do not match"
            )

    @classmethod
    def from_doas(
        cls, array: SensorArray, desired: DoA, interferer: DoA, bins=None
    ) -> Self:
        return cls(
            desired=steering_vector(array, desired, bins),
            interferer=steering_vector(array, interferer, bins),
        )

    @property
    def bins(self) -> np.ndarray:
        return self.desired.bins

    @property
    def matrices(self) -> np.ndarray:
        """``(K, M, 2)`` constraint matrices."""
        return np.stack([self.desired.values, self.interferer.values], axis=-1)

    @property
    def singular_values(self) -> np.ndarray:
        """Smallest singular value of C per bin."""
        return np.linalg.svd(self.matrices, compute_uv=False)[:, -1]

    @property
    def collided(self) -> np.ndarray:
        """Boolean mask of bins where C is numerically rank-deficient."""
        m = self.desired.values.shape[1]
        return self.singular_values < defaults.collision_threshold * np.sqrt(m)


@dataclass(frozen=True, eq=False)
class BeamformerWeights:
    """Per-bin weights of one beamformer.

    Attributes:
        values: ``(K, M)`` complex weights.
        method: Beamformer family.
        bins: Bin indices of the rows.
        constraints: Constraints the weights were built with, if any.
        collided_bins: Bins that fell back to distortionless weights.
        loaded: Bins whose covariance needed diagonal loading.
    """

    values: np.ndarray
    method: BeamformerMethod
    bins: np.ndarray
    constraints: ConstraintSet | None = None
    collided_bins: tuple[int, ...] = ()
    loaded: tuple[int, ...] = ()

    @property
    def n_bins(self) -> int:
        return self.values.shape[0]

    def response(self, sv: SteeringVector) -> np.ndarray:
        """``h[k]^H v[k]`` for a steering vector ``v``."""
        return np.einsum("km,km->k", self.values.conj(), sv.values)

    def output_power(self, covariance: np.ndarray) -> np.ndarray:
        """Real ``h^H R h`` per bin."""
        return np.einsum(
            "km,kmn,kn->k", self.values.conj(), covariance, self.values
        ).real

    def export(self, stem: Path) -> tuple[Path, Path]:
        """Write the weights to a matrix sidecar pair.

        Raises:
            MatrixFileWriteError: If writing fails (from write_matrices).
        """
        metadata = {
            "method": self.method.code,
            "bins": self.bins.tolist(),
            "collided_bins": list(self.collided_bins),
            "loaded": list(self.loaded),
        }
        return write_matrices(stem, {"weights": self.values}, metadata)

    @classmethod
    def load(cls, stem: Path) -> Self:
        """Read weights written by :meth:`export`; constraints are not restored.

        Raises:
            MatrixFileLoadError: If the files are missing or malformed.
            BeamformerError: If the method tag is unknown.
        """
        arrays, metadata = read_matrices(stem)
        method = BeamformerMethod.from_code(metadata.get("method", ""))
        if method is None:
            raise BeamformerError(f"Unknown beamformer method {metadata.get('method')!r}")
        return cls(
            values=arrays["weights"],
            method=method,
            bins=np.asarray(metadata["bins"]),
            collided_bins=tuple(metadata.get("collided_bins", ())),
            loaded=tuple(metadata.get("loaded", ())),
        )


def _matrices(covariance) -> np.ndarray:
    return np.asarray(getattr(covariance, "matrices", covariance), dtype=np.complex128)


def _hpd_solve(
    covariance: np.ndarray, rhs: np.ndarray, bins: np.ndarray, load: float | None = None
) -> tuple[np.ndarray, list[int]]:
    solution = np.empty_like(rhs)
    loaded: list[int] = []
    identity = np.eye(covariance.shape[-1])
    for i, matrix in enumerate(covariance):
        try:
            factor = cho_factor(matrix)
        except LinAlgError as e:
            if load is None:
                raise BeamformerError(
                    f"Covariance of bin {int(bins[i])} is not positive definite: {e}"
                ) from e
            factor = cho_factor(matrix + load * identity)
            loaded.append(int(bins[i]))
            logger.warning(f"Loaded covariance of bin {int(bins[i])} with {load:g} I")
        solution[i] = cho_solve(factor, rhs[i])
    return solution, loaded


def _check_bins(covariance: np.ndarray, sv: SteeringVector):
    k, m = sv.values.shape
    if covariance.shape != (k, m, m):
        raise DimensionMismatchError(
            f"Covariances of shape {covariance.shape} do not match {k} bins "
            f"and {m} sensors"
        )


def _distortionless(covariance: np.ndarray, d: np.ndarray, bins, load=None):
    solved, loaded = _hpd_solve(covariance, d[..., None], bins, load)
    solved = solved[..., 0]
    gain = np.einsum("km,km->k", d.conj(), solved)
    return solved / gain.conj()[:, None], loaded


def _constrained(
    covariance: np.ndarray,
    cs: ConstraintSet,
    method: BeamformerMethod,
    on_collision: CollisionPolicy,
    load: float | None = None,
) -> BeamformerWeights:
    _check_bins(covariance, cs.desired)
    collided = cs.collided
    bins = cs.bins
    if np.any(collided):
        names = [int(k) for k in bins[collided]]
        if on_collision == "raise":
            raise ConstraintCollisionError(
                f"Desired and interferer constraints collide in bins {names}"
            )
        logger.warning(f"Using distortionless weights in collided bins {names}")

    c = cs.matrices
    values = np.empty((len(bins), c.shape[1]), dtype=np.complex128)
    keep = ~collided
    loaded: list[int] = []
    if np.any(keep):
        solved, loaded = _hpd_solve(covariance[keep], c[keep], bins[keep], load)
        gram = np.einsum("kmi,kmj->kij", c[keep].conj(), solved)
        mix = np.linalg.solve(gram, np.broadcast_to(RESPONSE, (len(gram), 2))[..., None])
        values[keep] = (solved @ mix)[..., 0]
    if np.any(collided):
        values[collided], fallback = _distortionless(
            covariance[collided], cs.desired.values[collided], bins[collided], load
        )
        loaded += fallback
    logger.debug(f"Computed {method.display_name} weights for {len(bins)} bins")
    return BeamformerWeights(
        values=values,
        method=method,
        bins=bins,
        constraints=cs,
        collided_bins=tuple(int(k) for k in bins[collided]),
        loaded=tuple(sorted(loaded)),
    )


def lcmv(
    ncm, cs: ConstraintSet, *, on_collision: CollisionPolicy = "raise"
) -> BeamformerWeights:
    """LCMV weights ``R^-1 C (C^H R^-1 C)^-1 (1, 0)`` on the noise covariance.

    Args:
        ncm: NoiseCovariance or ``(K, M, M)`` Hermitian positive-definite matrices.
        cs: Constraints.
        on_collision: ``"raise"`` or ``"distortionless"`` (MVDR weights on
            collided bins).

    Returns:
        BeamformerWeights: Weights with ``h^H d = 1`` and ``h^H b = 0``.

    Raises:
        ConstraintCollisionError: If d and b are numerically collinear in a
            bin and ``on_collision`` is ``"raise"``.
        BeamformerError: If the NCM is not positive definite.
    """
    return _constrained(_matrices(ncm), cs, BeamformerMethod.LCMV, on_collision)


def mvdr(ncm, d: SteeringVector, *, form: MvdrForm = "standard") -> BeamformerWeights:
    """MVDR weights.

    ``standard`` computes ``R^-1 d / (d^H R^-1 d)``. ``printed`` computes
    ``R d / (d^H R d)``; it keeps the distortionless response but does not
    minimize the output noise power.

    Raises:
        BeamformerError: If the NCM is not positive definite or ``form`` is unknown.
    """
    covariance = _matrices(ncm)
    _check_bins(covariance, d)
    match form:
        case "standard":
            values, _ = _distortionless(covariance, d.values, d.bins)
        case "printed":
            mapped = np.einsum("kmn,kn->km", covariance, d.values)
            gain = np.einsum("km,km->k", d.values.conj(), mapped)
            values = mapped / gain.conj()[:, None]
        case _:
            raise BeamformerError(f"Unknown MVDR form {form!r}")
    return BeamformerWeights(values=values, method=BeamformerMethod.MVDR, bins=d.bins)


def lcmp(
    ry,
    cs: ConstraintSet,
    *,
    epsilon: float = defaults.epsilon,
    on_collision: CollisionPolicy = "raise",
) -> BeamformerWeights:
    """LCMP weights: LCMV built on the observed covariance.

    Bins whose observed covariance is not positive definite are loaded with
    ``epsilon * I`` and listed in ``loaded``.

    Raises:
        ConstraintCollisionError: If the constraints collide and
            ``on_collision`` is ``"raise"``.
    """
    return _constrained(
        _matrices(ry), cs, BeamformerMethod.LCMP, on_collision, load=epsilon
    )


def delay_and_sum(d: SteeringVector) -> BeamformerWeights:
    """Delay-and-sum weights ``d / M``."""
    m = d.values.shape[1]
    return BeamformerWeights(
        values=d.values / m, method=BeamformerMethod.DELAY_AND_SUM, bins=d.bins
    )


def steered_power(
    ry, array: SensorArray, azimuths: np.ndarray, bins=None, elevation: float = 0.0
) -> np.ndarray:
    """Delay-and-sum output power over an azimuth grid.

    Returns:
        np.ndarray: ``(K, G)`` real powers ``b^H R b / M^2``.
    """
    covariance = _matrices(ry)
    grid = steering_grid(array, azimuths, bins, elevation)
    power = np.einsum("kgm,kmn,kgn->kg", grid.conj(), covariance, grid).real
    return power / array.n_sensors**2


__all__ = [
    "RESPONSE",
    "BeamformerMethod",
    "BeamformerWeights",
    "CollisionPolicy",
    "ConstraintSet",
    "MvdrForm",
    "delay_and_sum",
    "lcmp",
    "lcmv",
    "mvdr",
    "steered_power",
]
