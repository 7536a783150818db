"""Named scenario grids."""

import itertools
import logging
from collections.abc import Callable, Sequence

from .. import defaults
from ..exceptions import UnknownPresetError
from ..suggest import did_you_mean
from .scenario import ScenarioConfig

logger = logging.getLogger(__name__)

T60_MS: tuple[float, ...] = (0.0, 500.0, 800.0)
DISTANCES: tuple[float, ...] = (0.5, 1.5, 3.0)
SIR_DB: tuple[float, ...] = (-10.0, 0.0, 5.0)
SCR_DB: tuple[float, ...] = (0.0, 5.0, 10.0)
INTERFERER_AZIMUTHS: tuple[float, ...] = (10.0, 30.0, 50.0, 70.0, 90.0, 110.0)


def product_grid(
    t60_ms: Sequence[float] = T60_MS,
    desired_distances: Sequence[float] = DISTANCES,
    interferer_distances: Sequence[float] = DISTANCES,
    sir_db: Sequence[float] = SIR_DB,
    scr_db: Sequence[float] = SCR_DB,
    azimuths: Sequence[float] = INTERFERER_AZIMUTHS,
    **common,
) -> list[ScenarioConfig]:
    """Cartesian product of the swept parameters, in a fixed nesting order.

    Extra keyword arguments (seed, duration, array, ...) apply to every point.
    """
    return [
        ScenarioConfig(
            t60_ms=t60,
            desired_distance=dx,
            interferer_distance=dp,
            sir_db=sir,
            scr_db=scr,
            interferer_azimuth=azimuth,
            **common,
        )
        for t60, dx, dp, sir, scr, azimuth in itertools.product(
            t60_ms, desired_distances, interferer_distances, sir_db, scr_db, azimuths
        )
    ]


def table1_full(**common) -> list[ScenarioConfig]:
    """The full grid of 1458 configurations."""
    return product_grid(**common)


def table1_reduced(**common) -> list[ScenarioConfig]:
    """The 288-point robustness grid with far sources and harsher ratios."""
    return product_grid(
        desired_distances=(1.5, 3.0),
        interferer_distances=(1.5, 3.0),
        sir_db=(-10.0, 0.0),
        scr_db=(0.0, 5.0),
        **common,
    )


def table1_mini(**common) -> list[ScenarioConfig]:
    """Three configurations spanning the reverberation settings."""
    points = (
        (0.0, 1.5, 1.5, 0.0, 5.0, 30.0),
        (500.0, 1.5, 3.0, -10.0, 5.0, 70.0),
        (800.0, 3.0, 1.5, 5.0, 10.0, 110.0),
    )
    return [
        ScenarioConfig(
            t60_ms=t60,
            desired_distance=dx,
            interferer_distance=dp,
            sir_db=sir,
            scr_db=scr,
            interferer_azimuth=azimuth,
            **common,
        )
        for t60, dx, dp, sir, scr, azimuth in points
    ]


def desk_benchmark(**common) -> list[ScenarioConfig]:
    """Anechoic sweep over interferer azimuths at SIR 0 dB and SCR 5 dB."""
    return product_grid(
        t60_ms=(0.0,),
        desired_distances=(1.5,),
        interferer_distances=(1.5,),
        sir_db=(0.0,),
        scr_db=(5.0,),
        **common,
    )


SCENARIO_PRESETS: dict[str, Callable[..., list[ScenarioConfig]]] = {
    "table1-full": table1_full,
    "table1-reduced": table1_reduced,
    "table1-mini": table1_mini,
    "desk-benchmark": desk_benchmark,
}
"""dict: Named scenario grids."""


def scenario_preset(
    name: str, *, seed: int = 0, duration: float = defaults.scenario_duration, **common
) -> list[ScenarioConfig]:
    """Expand a named grid.

    Raises:
        UnknownPresetError: If ``name`` is not registered.
    """
    try:
        factory = SCENARIO_PRESETS[name]
    except KeyError:
        raise UnknownPresetError(
            f"Unknown scenario preset {name!r}." + did_you_mean(name, SCENARIO_PRESETS)
        ) from None
    grid = factory(seed=seed, duration=duration, **common)
    logger.debug(f"Expanded preset {name} into {len(grid)} scenarios")
    return grid


__all__ = [
    "DISTANCES",
    "INTERFERER_AZIMUTHS",
    "SCENARIO_PRESETS",
    "SCR_DB",
    "SIR_DB",
    "T60_MS",
    "desk_benchmark",
    "product_grid",
    "scenario_preset",
    "table1_full",
    "table1_mini",
    "table1_reduced",
]
