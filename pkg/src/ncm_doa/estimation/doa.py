"""Interferer direction estimation.

The broadband cost of a variance set and an interferer direction is the
summed Frobenius misfit between the modeled and the observed covariances.
Its gradient with respect to the interferer direction is assembled from
per-pair terms ``G = r * sum_k k sigma_p[k] Im(conj(E_ji[k]) R_p,ji[k])``
where ``E`` is the model residual. The returned gradient is the true
gradient of the cost; its negative is always a descent direction.

:func:`joint_estimate` alternates the per-bin variance solve with a few
descent steps on the direction until the gradient is small.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from pathlib import Path

import numpy as np

from .. import defaults
from ..exceptions import EstimationError, InvalidArrayError
from ..geometry import DoA, RelativeGeometry, SensorArray, relative_geometry, wrap_angle
from ..storage import write_json_lines
from .covariance import (
    BinCovarianceSet,
    NoiseCovariance,
    VarianceVector,
    _variance_values,
    assemble_ncm,
    model_covariance,
)
from .solver import ActiveSetState, active_histogram, solve_band

logger = logging.getLogger(__name__)


class GradientForm(Enum):
    """Variants of the direction gradient.

    Each enum value contains a tuple of (code, description).
    """

    FULL = ("full", "Exact gradient for arbitrary 3-D arrays")
    GENERAL = ("general", "Leading elevation sine/cosine factors dropped")
    PLANAR = ("planar", "General form with pair elevations dropped")
    LINEAR = ("linear", "Signed pair sum for collinear arrays, azimuth only")

    @property
    def code(self) -> str:
        return self.value[0]

    @property
    def description(self) -> str:
        return self.value[1]

    @classmethod
    def from_code(cls, code: str) -> "GradientForm | None":
        """Find a form by its code (case-insensitive)."""
        for form in cls:
            if form.code == code.lower():
                return form
        return None


@lru_cache(maxsize=16)
def _pair_geometry(array: SensorArray) -> RelativeGeometry:
    return relative_geometry(array, allow_coincident=True)


def gradient_scale(array: SensorArray) -> float:
    """Positive prefactor ``4 pi f0 / (N c)`` of the direction gradient."""
    return 4.0 * math.pi * array.sampling_rate / (array.n_fft * array.wave_speed)


def _attached(comps: BinCovarianceSet, doa: DoA) -> BinCovarianceSet:
    if comps.interferer is not None and comps.interferer_doa == doa:
        return comps
    return comps.with_interferer(doa)


def broadband_cost(
    sigma: VarianceVector | np.ndarray, doa: DoA, comps: BinCovarianceSet
) -> float:
    """Summed squared Frobenius misfit ``sum_k ||R_model[k] - R_y[k]||_F^2``.

    Args:
        sigma: ``(K, 4)`` non-negative variances, one row per bin of ``comps``.
        doa: Interferer direction.
        comps: Covariance set.

    Returns:
        float: Non-negative cost.

    Raises:
        NegativeVarianceError: If any variance is negative (from model_covariance).
    """
    comps = _attached(comps, doa)
    residual = model_covariance(sigma, comps) - comps.observed
    return float(np.sum(residual.real**2 + residual.imag**2))


@dataclass(frozen=True, eq=False)
class GradientTerms:
    """Per-pair factors of the direction gradient.

    Attributes:
        first: ``(P,)`` pair indices i.
        second: ``(P,)`` pair indices j.
        f1: ``sin(theta - psi) cos(lambda)`` per pair.
        f2: ``cos(theta - psi) cos(lambda)`` per pair.
        f3: ``sin(lambda)`` per pair.
        g: Real pair weights G.
        residual: ``(K, P)`` residual entries ``E_ji``.
    """

    first: np.ndarray
    second: np.ndarray
    f1: np.ndarray
    f2: np.ndarray
    f3: np.ndarray
    g: np.ndarray
    residual: np.ndarray


def gradient_terms(
    sigma: VarianceVector | np.ndarray,
    doa: DoA,
    comps: BinCovarianceSet,
    pairs: tuple[np.ndarray, np.ndarray] | None = None,
) -> GradientTerms:
    """Per-pair gradient terms at ``(sigma, doa)``.

    Args:
        sigma: ``(K, 4)`` variances.
        doa: Interferer direction.
        comps: Covariance set.
        pairs: Index arrays ``(i, j)``; the pairs with ``i < j`` when None.

    Raises:
        NegativeVarianceError: If any variance is negative (from model_covariance).
    """
    comps = _attached(comps, doa)
    geometry = _pair_geometry(comps.array)
    first, second = geometry.upper_pairs() if pairs is None else pairs
    first = np.asarray(first)
    second = np.asarray(second)

    values = _variance_values(sigma, comps.n_bins)
    residual = model_covariance(values, comps) - comps.observed
    e_ji = residual[:, second, first]
    r_ji = comps.interferer.matrices[:, second, first]
    weights = comps.bins * values[:, 1]
    g = geometry.distance[first, second] * (weights @ np.imag(e_ji.conj() * r_ji))

    psi = geometry.azimuth[first, second]
    lam = geometry.elevation[first, second]
    return GradientTerms(
        first=first,
        second=second,
        f1=np.sin(doa.azimuth - psi) * np.cos(lam),
        f2=np.cos(doa.azimuth - psi) * np.cos(lam),
        f3=np.sin(lam),
        g=g,
        residual=e_ji,
    )


def doa_gradient(
    sigma: VarianceVector | np.ndarray,
    doa: DoA,
    comps: BinCovarianceSet,
    form: GradientForm | str = GradientForm.FULL,
    *,
    scaled: bool = True,
) -> np.ndarray:
    """Gradient of :func:`broadband_cost` with respect to (azimuth, elevation).

    Args:
        sigma: ``(K, 4)`` variances, held constant.
        doa: Interferer direction.
        comps: Covariance set.
        form: Gradient variant. Only ``full`` is exact; the others keep its
            sign pattern and zero set under their geometric assumptions.
        scaled: Include the positive prefactor ``4 pi f0 / (N c)``.

    Returns:
        np.ndarray: ``(2,)`` gradient ``(d/dtheta, d/dphi)``.

    Raises:
        InvalidArrayError: If the linear form is used with a non-collinear array.
        EstimationError: If ``form`` is unknown.
    """
    if isinstance(form, str):
        code = form
        form = GradientForm.from_code(code)
        if form is None:
            raise EstimationError(f"Unknown gradient form {code!r}")
    scale = gradient_scale(comps.array) if scaled else 1.0
    terms = gradient_terms(sigma, doa, comps)
    phi = doa.elevation

    match form:
        case GradientForm.FULL:
            d_theta = -2.0 * math.cos(phi) * np.sum(terms.f1 * terms.g)
            d_phi = -2.0 * np.sum(
                (math.sin(phi) * terms.f2 - math.cos(phi) * terms.f3) * terms.g
            )
        case GradientForm.GENERAL:
            d_theta = -2.0 * np.sum(terms.f1 * terms.g)
            d_phi = -2.0 * np.sum(terms.f2 * terms.g)
        case GradientForm.PLANAR:
            psi = _pair_geometry(comps.array).azimuth[terms.first, terms.second]
            d_theta = -2.0 * np.sum(np.sin(doa.azimuth - psi) * terms.g)
            d_phi = -2.0 * np.sum(np.cos(doa.azimuth - psi) * terms.g)
        case GradientForm.LINEAR:
            array = comps.array
            if not array.is_collinear:
                raise InvalidArrayError("The linear gradient form needs a collinear array")
            axis = array.axis
            pair_vectors = array.positions[terms.second] - array.positions[terms.first]
            orientation = np.sign(pair_vectors @ axis)
            theta = doa.azimuth - math.atan2(axis[1], axis[0])
            d_theta = -2.0 * np.sign(math.sin(theta)) * np.sum(orientation * terms.g)
            d_phi = 0.0
    return scale * np.array([d_theta, d_phi], dtype=np.float64)


def reduce_to_azimuth(azimuth: float, elevation: float) -> float:
    """Equivalent cone angle ``arccos(cos(theta) cos(phi))`` for linear arrays."""
    return float(np.arccos(np.clip(math.cos(azimuth) * math.cos(elevation), -1.0, 1.0)))


@dataclass(frozen=True)
class DescentConfig:
    """Parameters of the direction descent.

    Attributes:
        initial: Starting direction. When None the search starts from
            ``starts`` equally spaced azimuths around the desired direction.
        step: Initial and maximum step in radians.
        max_iterations: Iteration cap per start.
        tolerance: Gradient tolerance relative to ``sum_k ||R_y[k]||_F^2``.
        contraction: Backtracking factor.
        armijo: Sufficient-decrease constant.
        min_step: Step below which the line search gives up.
        offsets: Azimuth offsets applied to ``initial`` (multi-start).
        starts: Number of starts when ``initial`` is None.
        estimate_elevation: Also move the elevation.
        exclusion_radius: Minimum azimuth separation from the desired direction.
        form: Gradient variant.
        scaled: Use the scaled gradient.
    """

    initial: DoA | None = None
    step: float = defaults.descent_step
    max_iterations: int = defaults.descent_max_iterations
    tolerance: float = defaults.descent_tolerance
    contraction: float = defaults.descent_contraction
    armijo: float = defaults.descent_armijo
    min_step: float = defaults.descent_min_step
    offsets: tuple[float, ...] = (0.0,)
    starts: int = defaults.multi_starts
    estimate_elevation: bool = False
    exclusion_radius: float = defaults.exclusion_radius
    form: GradientForm = GradientForm.FULL
    scaled: bool = True

    def __post_init__(self):
        if not self.step > 0:
            raise EstimationError(f"Descent step must be positive, got {self.step}")
        if not self.tolerance > 0:
            raise EstimationError(f"Tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise EstimationError(
                f"Iteration cap must be at least 1, got {self.max_iterations}"
            )
        if not 0 < self.contraction < 1:
            raise EstimationError(
                f"Contraction must lie in (0, 1), got {self.contraction}"
            )
        if self.starts < 1 or not self.offsets:
            raise EstimationError("At least one start is required")

    def start_points(self, desired: DoA) -> list[DoA]:
        """Starting directions of a multi-start search."""
        if self.initial is not None:
            return [self.initial.moved(offset) for offset in self.offsets]
        spacing = 2.0 * math.pi / self.starts
        return [
            DoA(desired.azimuth + spacing * (n + 0.5), desired.elevation)
            for n in range(self.starts)
        ]


@dataclass(frozen=True)
class DescentResult:
    """Outcome of a descent run.

    Attributes:
        doa: Final direction.
        cost: Broadband cost at ``doa``.
        iterations: Accepted steps.
        gradient: Gradient at ``doa`` (elevation zeroed when frozen).
        converged: True when the gradient dropped below the tolerance.
        start: Direction the run started from.
    """

    doa: DoA
    cost: float
    iterations: int
    gradient: np.ndarray
    converged: bool
    start: DoA

    @property
    def gradient_norm(self) -> float:
        return float(np.linalg.norm(self.gradient))


def _outside_exclusion(candidate: DoA, previous: DoA, desired: DoA, radius: float) -> DoA:
    offset = wrap_angle(candidate.azimuth - desired.azimuth)
    if abs(offset) >= radius:
        return candidate
    side = np.sign(offset) or np.sign(wrap_angle(previous.azimuth - desired.azimuth)) or 1.0
    return DoA(desired.azimuth + side * radius, candidate.elevation)


def _masked_gradient(sigma, doa, comps, cfg: DescentConfig) -> np.ndarray:
    gradient = doa_gradient(sigma, doa, comps, cfg.form, scaled=cfg.scaled)
    if not cfg.estimate_elevation:
        gradient[1] = 0.0
    return gradient


def _descend(
    sigma: np.ndarray,
    start: DoA,
    cfg: DescentConfig,
    comps: BinCovarianceSet,
    threshold: float,
) -> DescentResult:
    doa = start
    cost = broadband_cost(sigma, doa, comps)
    alpha = cfg.step
    iterations = 0
    gradient = _masked_gradient(sigma, doa, comps, cfg)
    converged = False

    for _ in range(cfg.max_iterations):
        norm = float(np.linalg.norm(gradient))
        if norm <= threshold:
            converged = True
            break
        direction = -gradient / norm
        step = alpha
        accepted = None
        while step >= cfg.min_step:
            candidate = _outside_exclusion(
                doa.moved(step * direction[0], step * direction[1]),
                doa,
                comps.desired_doa,
                cfg.exclusion_radius,
            )
            candidate_cost = broadband_cost(sigma, candidate, comps)
            if candidate_cost <= cost - cfg.armijo * step * norm:
                accepted = candidate
                break
            step *= cfg.contraction
        if accepted is None:
            logger.debug(f"Line search stalled at azimuth {doa.azimuth_deg:.3f} deg")
            break
        doa, cost = accepted, candidate_cost
        alpha = min(step / cfg.contraction, cfg.step)
        iterations += 1
        gradient = _masked_gradient(sigma, doa, comps, cfg)
    else:
        converged = float(np.linalg.norm(gradient)) <= threshold

    return DescentResult(
        doa=doa,
        cost=cost,
        iterations=iterations,
        gradient=gradient,
        converged=converged,
        start=start,
    )


def _threshold(comps: BinCovarianceSet, tolerance: float) -> float:
    return tolerance * float(np.sum(np.abs(comps.observed) ** 2))


def descend_doa(
    sigma: VarianceVector | np.ndarray,
    initial: DoA,
    cfg: DescentConfig,
    comps: BinCovarianceSet,
) -> DescentResult:
    """Armijo gradient descent on the interferer direction with variances fixed.

    Runs one descent per offset in ``cfg.offsets`` around ``initial`` and
    keeps the lowest-cost result. The returned cost never exceeds the cost
    at the corresponding start.

    Args:
        sigma: ``(K, 4)`` variances.
        initial: Starting direction.
        cfg: Descent parameters.
        comps: Covariance set.

    Returns:
        DescentResult: Best run; ``converged`` reports the gradient test.

    Raises:
        NegativeVarianceError: If any variance is negative.
        InvalidArrayError: If the linear form is used with a non-collinear array.
    """
    values = _variance_values(sigma, comps.n_bins)
    threshold = _threshold(comps, cfg.tolerance)
    best = None
    for offset in cfg.offsets:
        result = _descend(values, initial.moved(offset), cfg, comps, threshold)
        if best is None or result.cost < best.cost:
            best = result
    logger.debug(
        f"Descent ended at azimuth {best.doa.azimuth_deg:.3f} deg after "
        f"{best.iterations} steps"
    )
    return best


@dataclass(frozen=True)
class EstimatorConfig:
    """Parameters of the alternating variance / direction scheme.

    Attributes:
        descent: Direction descent parameters; ``descent.max_iterations`` is
            replaced by ``inner_iterations`` inside the alternation.
        max_outer: Alternation cap.
        inner_iterations: Descent steps per alternation.
        min_bin: First bin of the estimation band.
        max_bin: Last bin of the band; the top bin when None.
    """

    descent: DescentConfig = field(default_factory=DescentConfig)
    max_outer: int = defaults.joint_max_outer
    inner_iterations: int = defaults.joint_inner_iterations
    min_bin: int = defaults.estimation_min_bin
    max_bin: int | None = None

    def __post_init__(self):
        if self.max_outer < 1 or self.inner_iterations < 1:
            raise EstimationError("Iteration caps must be at least 1")


@dataclass(frozen=True, eq=False)
class JointEstimate:
    """Result of :func:`joint_estimate`.

    Attributes:
        variances: Variances of every bin (out-of-band bins hold white noise only).
        doa: Estimated interferer direction.
        ncm: Noise covariance over every bin.
        iterations: Outer iterations of the winning start.
        gradient_norm: Final gradient magnitude.
        converged: Gradient test passed.
        low_confidence: The interferer carries no measurable power.
        cost: Broadband cost over the band.
        band: Bins the estimate was fitted on.
        states: Per-bin solver states over the band.
        trace: Per-iteration records of every start.
    """

    variances: VarianceVector
    doa: DoA
    ncm: NoiseCovariance
    iterations: int
    gradient_norm: float
    converged: bool
    low_confidence: bool
    cost: float
    band: np.ndarray
    states: list[ActiveSetState] = field(default_factory=list)
    trace: list[dict] = field(default_factory=list)


@dataclass
class _Run:
    sigma: VarianceVector
    states: list[ActiveSetState]
    doa: DoA
    cost: float
    iterations: int
    gradient: np.ndarray
    converged: bool


def _record(start: int, iteration: int, run: _Run) -> dict:
    return {
        "start": start,
        "iteration": iteration,
        "cost": run.cost,
        "azimuth": run.doa.azimuth,
        "elevation": run.doa.elevation,
        "gradient": run.gradient.tolist(),
        "active": active_histogram(run.states),
    }


def _alternate(
    work: BinCovarianceSet,
    start: DoA,
    cfg: EstimatorConfig,
    threshold: float,
    index: int,
    trace: list[dict],
) -> _Run:
    inner = replace(cfg.descent, max_iterations=cfg.inner_iterations)
    doa = start
    sigma, states = solve_band(work.with_interferer(doa))
    run = _Run(
        sigma=sigma,
        states=states,
        doa=doa,
        cost=broadband_cost(sigma.values, doa, work),
        iterations=0,
        gradient=_masked_gradient(sigma.values, doa, work, inner),
        converged=False,
    )
    trace.append(_record(index, 0, run))

    for outer in range(1, cfg.max_outer + 1):
        if float(np.linalg.norm(run.gradient)) <= threshold:
            run.converged = True
            break
        step = _descend(run.sigma.values, run.doa, inner, work, threshold)
        if step.iterations == 0:
            break
        comps = work.with_interferer(step.doa)
        sigma, states = solve_band(comps)
        run = _Run(
            sigma=sigma,
            states=states,
            doa=step.doa,
            cost=broadband_cost(sigma.values, step.doa, comps),
            iterations=outer,
            gradient=_masked_gradient(sigma.values, step.doa, comps, inner),
            converged=False,
        )
        trace.append(_record(index, outer, run))
    if not run.converged:
        run.converged = float(np.linalg.norm(run.gradient)) <= threshold
    return run


def joint_estimate(
    comps: BinCovarianceSet, cfg: EstimatorConfig | None = None
) -> JointEstimate:
    """Jointly estimate the interferer direction, the variances and the NCM.

    Alternates the non-negative variance solve of every band bin with a few
    descent steps on the direction. With no initial direction the scheme is
    run from equally spaced azimuths and the lowest-cost run is kept.

    Args:
        comps: Covariance set holding the observed matrices of every bin.
        cfg: Estimator parameters.

    Returns:
        JointEstimate: Variances, direction and noise covariance.

    Raises:
        DegenerateSystemError: If the interferer collides with the desired
            direction (from solve_band).
        EstimationError: If the band is empty.
    """
    cfg = cfg or EstimatorConfig()
    max_bin = comps.bins.max() if cfg.max_bin is None else cfg.max_bin
    band = comps.bins[(comps.bins >= cfg.min_bin) & (comps.bins <= max_bin)]
    if len(band) == 0:
        raise EstimationError(f"Estimation band [{cfg.min_bin}, {max_bin}] is empty")
    work = comps.select(band)
    threshold = _threshold(work, cfg.descent.tolerance)

    trace: list[dict] = []
    best = None
    for index, start in enumerate(cfg.descent.start_points(comps.desired_doa)):
        run = _alternate(work, start, cfg, threshold, index, trace)
        logger.debug(
            f"Start {index} at {start.azimuth_deg:.1f} deg reached "
            f"{run.doa.azimuth_deg:.3f} deg with cost {run.cost:.6e}"
        )
        if best is None or run.cost < best.cost:
            best = run

    values = np.zeros((comps.n_bins, 4))
    in_band = np.isin(comps.bins, band)
    values[in_band] = best.sigma.values
    out_of_band = ~in_band
    if np.any(out_of_band):
        trace_white = np.trace(comps.adjusted[out_of_band], axis1=1, axis2=2).real
        values[out_of_band, 3] = np.maximum(trace_white / comps.n_sensors, 0.0)
    variances = VarianceVector(values=values, bins=comps.bins)
    ncm = assemble_ncm(variances, comps.with_interferer(best.doa))

    power = float(np.sum(np.trace(work.observed, axis1=1, axis2=2).real))
    low_confidence = float(np.sum(best.sigma.interferer)) <= (
        defaults.low_confidence_ratio * power
    )
    if not best.converged:
        logger.warning(
            f"Joint estimate did not converge; gradient norm "
            f"{np.linalg.norm(best.gradient):.3e} after {best.iterations} iterations"
        )
    if low_confidence:
        logger.warning("Interferer power is negligible; direction is low-confidence")

    return JointEstimate(
        variances=variances,
        doa=best.doa,
        ncm=ncm,
        iterations=best.iterations,
        gradient_norm=float(np.linalg.norm(best.gradient)),
        converged=best.converged,
        low_confidence=low_confidence,
        cost=best.cost,
        band=band,
        states=best.states,
        trace=trace,
    )


def write_trace(path: Path, estimate: JointEstimate) -> Path:
    """Stream the per-iteration trace of an estimate to JSON-lines.

    Raises:
        ConfigWriteError: If writing fails (from write_json_lines).
    """
    write_json_lines(path, estimate.trace)
    return Path(path)


__all__ = [
    "DescentConfig",
    "DescentResult",
    "EstimatorConfig",
    "GradientForm",
    "GradientTerms",
    "JointEstimate",
    "broadband_cost",
    "descend_doa",
    "doa_gradient",
    "gradient_scale",
    "gradient_terms",
    "joint_estimate",
    "reduce_to_azimuth",
    "write_trace",
]
