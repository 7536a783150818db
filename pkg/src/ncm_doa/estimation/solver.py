"""Per-bin non-negative variance solver.

For a fixed interferer direction the modeled covariance is linear in the
four variances, so the Frobenius misfit of bin ``k`` is the quadratic
``0.5 s^T A s - q^T s + ||R_{y,eps}||_F^2`` with ``A[w, z] = 2 Re <R_w, R_z>``
and ``q[z] = 2 Re <R_z, R_{y,eps}>``. The constrained minimum over ``s >= 0``
is found by solving reduced systems with some variances clamped to zero:

1. Solve the full system. A non-negative solution is the answer.
2. Otherwise try clamping subsets of the negative entries, smallest subsets
   first, keeping the cheapest feasible candidate of the first tier that
   has one.
3. Certify the candidate with the multiplier signs ``(A s - q)_z >= 0`` on
   the clamped entries. If certification fails (or no tier was feasible)
   the remaining subsets are enumerated, reusing every solve already done.

At most 16 reduced systems are solved per bin.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .. import defaults
from ..exceptions import DegenerateSystemError
from ..geometry import CovarianceKind
from ..storage import write_json
from .covariance import BinCovarianceSet, VarianceVector

logger = logging.getLogger(__name__)

KINDS: tuple[CovarianceKind, ...] = tuple(CovarianceKind)
"""tuple[CovarianceKind, ...]: Variance ordering (x, p, gamma, v)."""


@dataclass(frozen=True, eq=False)
class NormalSystem:
    """Normal equations of one bin.

    Attributes:
        a: ``(4, 4)`` real symmetric PSD matrix.
        q: ``(4,)`` right-hand side.
        reference: ``||R_{y,eps}||_F^2``, the cost at zero variances.
        bin: Bin index.
    """

    a: np.ndarray
    q: np.ndarray
    reference: float = 0.0
    bin: int = 0

    def cost(self, sigma: np.ndarray) -> float:
        sigma = np.asarray(sigma, dtype=np.float64)
        return float(0.5 * sigma @ self.a @ sigma - self.q @ sigma + self.reference)

    def gradient(self, sigma: np.ndarray) -> np.ndarray:
        return self.a @ np.asarray(sigma, dtype=np.float64) - self.q


@dataclass(frozen=True, eq=False)
class ActiveSetState:
    """Outcome of the constrained solve of one bin.

    Attributes:
        sigma: Non-negative variances.
        unconstrained: Solution of the full system, possibly negative.
        active: Indices clamped to zero.
        cost: Misfit at ``sigma``.
        multipliers: ``(A sigma - q)`` on active entries, zero elsewhere.
        solves: Number of reduced systems solved.
        exhaustive: True when the subset enumeration had to be completed.
        regularized: True when the diagonal of A was loaded.
        bin: Bin index.
    """

    sigma: np.ndarray
    unconstrained: np.ndarray
    active: tuple[int, ...]
    cost: float
    multipliers: np.ndarray
    solves: int
    exhaustive: bool = False
    regularized: bool = False
    bin: int = 0

    @property
    def active_kinds(self) -> tuple[CovarianceKind, ...]:
        return tuple(KINDS[i] for i in self.active)

    @property
    def active_code(self) -> str:
        """Compact label such as ``"p+gamma"``, or ``"none"``."""
        return "+".join(k.code for k in self.active_kinds) or "none"

    @property
    def slack(self) -> np.ndarray:
        """Slack variables ``mu`` with ``mu^2 = sigma`` on inactive entries."""
        mu = np.sqrt(self.sigma)
        mu[list(self.active)] = 0.0
        return mu


def _systems(comps: BinCovarianceSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    components = comps.components()
    adjusted = comps.adjusted
    a = 2.0 * np.einsum("zkmn,wkmn->kzw", components.conj(), components).real
    a = 0.5 * (a + a.transpose(0, 2, 1))
    q = 2.0 * np.einsum("zkmn,kmn->kz", components.conj(), adjusted).real
    reference = np.sum(np.abs(adjusted) ** 2, axis=(1, 2))
    return a, q, reference


def build_systems(comps: BinCovarianceSet) -> list[NormalSystem]:
    """Normal systems of every bin of a covariance set.

    Raises:
        MissingInterfererError: If the interferer is not set (from components).
    """
    a, q, reference = _systems(comps)
    return [
        NormalSystem(a=a[i], q=q[i], reference=float(reference[i]), bin=int(k))
        for i, k in enumerate(comps.bins)
    ]


def build_system(comps: BinCovarianceSet, k: int) -> NormalSystem:
    """Normal system of bin ``k`` (a bin index, not a row position).

    Raises:
        EstimationError: If ``k`` is not part of the set (from select).
        MissingInterfererError: If the interferer is not set (from components).
    """
    return build_systems(comps.select([k]))[0]


def _prepare(system: NormalSystem) -> tuple[np.ndarray, bool]:
    a = system.a
    diagonal = np.diag(a)
    if np.any(diagonal <= 0):
        empty = [KINDS[i].display_name for i in np.flatnonzero(diagonal <= 0)]
        raise DegenerateSystemError(
            f"Components {empty} vanish in bin {system.bin}"
        )
    correlation = a / np.sqrt(np.outer(diagonal, diagonal))
    for w, z in combinations(range(len(KINDS)), 2):
        if correlation[w, z] >= defaults.collinearity_limit:
            raise DegenerateSystemError(
                f"Components {KINDS[w].display_name} and {KINDS[z].display_name} "
                f"are indistinguishable in bin {system.bin}"
            )
    if np.linalg.cond(a) <= defaults.condition_limit:
        return a, False

    loaded = a + defaults.regularization_scale * np.trace(a) / 4.0 * np.eye(len(a))
    if np.linalg.cond(loaded) > defaults.condition_limit:
        raise DegenerateSystemError(
            f"Normal system of bin {system.bin} is singular even after regularization"
        )
    logger.warning(f"Regularized ill-conditioned normal system in bin {system.bin}")
    return loaded, True


def _reduced_solve(a: np.ndarray, q: np.ndarray, active: tuple[int, ...]) -> np.ndarray:
    sigma = np.zeros(len(q))
    free = [i for i in range(len(q)) if i not in active]
    if free:
        sigma[free] = np.linalg.solve(a[np.ix_(free, free)], q[free])
    return sigma


def solve_unconstrained(system: NormalSystem) -> np.ndarray:
    """Unconstrained minimizer ``A^{-1} q``; entries may be negative.

    Raises:
        DegenerateSystemError: If two components are indistinguishable or A
            stays singular after one regularization attempt.
    """
    a, _ = _prepare(system)
    return np.linalg.solve(a, system.q)


def _feasible(sigma: np.ndarray, tolerance: float) -> bool:
    return bool(np.all(sigma >= -tolerance))


def solve_nonnegative(system: NormalSystem) -> ActiveSetState:
    """Minimize the bin misfit subject to non-negative variances.

    Args:
        system: Normal system of one bin.

    Returns:
        ActiveSetState: The constrained minimizer and its bookkeeping.

    Raises:
        DegenerateSystemError: If the system is singular (from solve_unconstrained checks).
    """
    a, regularized = _prepare(system)
    q = system.q
    cache: dict[tuple[int, ...], np.ndarray] = {}

    def candidate(active: tuple[int, ...]) -> np.ndarray:
        if active not in cache:
            cache[active] = _reduced_solve(a, q, active)
        return cache[active]

    unconstrained = candidate(())
    tolerance = 1e-12 * max(float(np.max(np.abs(unconstrained))), 1e-300)
    chosen: tuple[int, ...] | None = ()
    exhaustive = False

    if not _feasible(unconstrained, tolerance):
        negatives = tuple(int(i) for i in np.flatnonzero(unconstrained < -tolerance))
        chosen = _best_feasible(
            system,
            candidate,
            tolerance,
            (c for n in range(1, len(negatives) + 1) for c in combinations(negatives, n)),
            tiered=True,
        )
        if chosen is None or not _certified(a, q, candidate(chosen), chosen):
            exhaustive = True
            subsets = (
                c for n in range(len(KINDS) + 1) for c in combinations(range(len(KINDS)), n)
            )
            chosen = _best_feasible(system, candidate, tolerance, subsets, tiered=False)
            logger.debug(f"Completed subset enumeration in bin {system.bin}")

    sigma = np.clip(candidate(chosen), 0.0, None)
    sigma[list(chosen)] = 0.0
    multipliers = np.zeros(len(KINDS))
    multipliers[list(chosen)] = (a @ sigma - q)[list(chosen)]
    return ActiveSetState(
        sigma=sigma,
        unconstrained=unconstrained,
        active=tuple(chosen),
        cost=system.cost(sigma),
        multipliers=multipliers,
        solves=len(cache),
        exhaustive=exhaustive,
        regularized=regularized,
        bin=system.bin,
    )


def _best_feasible(system, candidate, tolerance, subsets, *, tiered: bool):
    best: tuple[int, ...] | None = None
    best_cost = np.inf
    tier = None
    for active in subsets:
        if tiered and best is not None and len(active) != tier:
            break
        tier = len(active)
        sigma = candidate(active)
        free = [i for i in range(len(sigma)) if i not in active]
        if not _feasible(sigma[free], tolerance):
            continue
        cost = system.cost(np.clip(sigma, 0.0, None))
        if cost < best_cost:
            best, best_cost = active, cost
    return best


def _certified(a: np.ndarray, q: np.ndarray, sigma: np.ndarray, active) -> bool:
    if not active:
        return True
    sigma = np.clip(sigma, 0.0, None)
    multipliers = (a @ sigma - q)[list(active)]
    scale = max(float(np.max(np.abs(q))), float(np.max(np.abs(a))) * float(np.max(sigma)))
    return bool(np.all(multipliers >= -1e-9 * max(scale, 1e-300)))


def solve_band(comps: BinCovarianceSet) -> tuple[VarianceVector, list[ActiveSetState]]:
    """Constrained variances of every bin of a covariance set.

    Returns:
        tuple[VarianceVector, list[ActiveSetState]]: Variances and per-bin states.

    Raises:
        DegenerateSystemError: If a bin's system is singular.
        MissingInterfererError: If the interferer is not set (from components).
    """
    states = [solve_nonnegative(system) for system in build_systems(comps)]
    values = np.array([state.sigma for state in states])
    return VarianceVector(values=values, bins=comps.bins), states


def active_histogram(states: list[ActiveSetState]) -> dict[str, int]:
    """Count how many bins ended with each active set."""
    histogram: dict[str, int] = {}
    for state in states:
        histogram[state.active_code] = histogram.get(state.active_code, 0) + 1
    return dict(sorted(histogram.items()))


def dump_states(
    path: Path, systems: list[NormalSystem], states: list[ActiveSetState]
) -> Path:
    """Write ``(A, q, unconstrained, active, sigma)`` of every bin as JSON.

    Raises:
        ConfigWriteError: If writing fails (from write_json).
    """
    document = [
        {
            "bin": system.bin,
            "A": system.a,
            "q": system.q,
            "unconstrained": state.unconstrained,
            "active": [KINDS[i].code for i in state.active],
            "sigma": state.sigma,
            "cost": state.cost,
            "solves": state.solves,
            "exhaustive": state.exhaustive,
        }
        for system, state in zip(systems, states, strict=True)
    ]
    write_json(path, document)
    return Path(path)


__all__ = [
    "KINDS",
    "ActiveSetState",
    "NormalSystem",
    "active_histogram",
    "build_system",
    "build_systems",
    "dump_states",
    "solve_band",
    "solve_nonnegative",
    "solve_unconstrained",
]
