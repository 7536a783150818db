"""Simulation package for synthetic test scenes.

This package provides seedable speech-like and harmonic sources,
fractional-delay plane-wave propagation, spherically isotropic noise and
late reverberation, calibrated scenario synthesis with per-component
export, and the named evaluation grids.
"""

from .diffuse import decay_tail, diffuse_field, reverberant_tail, t60_ratio_db
from .grid import (
    SCENARIO_PRESETS,
    desk_benchmark,
    product_grid,
    scenario_preset,
    table1_full,
    table1_mini,
    table1_reduced,
)
from .propagation import (
    delay_signal,
    fractional_delay_filter,
    plane_wave,
    point_source,
    random_directions,
    spectral_plane_waves,
)
from .scenario import (
    COMPONENTS,
    ScenarioConfig,
    ScenarioSignals,
    export_scenario,
    load_scenario,
    load_scenario_config,
    measure_ratios,
    ring_field,
    synthesize,
    sweep,
)
from .sources import harmonic_surrogate, render_source, speech_surrogate, wav_source

__all__ = [
    "COMPONENTS",
    "SCENARIO_PRESETS",
    "ScenarioConfig",
    "ScenarioSignals",
    "decay_tail",
    "delay_signal",
    "desk_benchmark",
    "diffuse_field",
    "export_scenario",
    "fractional_delay_filter",
    "harmonic_surrogate",
    "load_scenario",
    "load_scenario_config",
    "measure_ratios",
    "plane_wave",
    "point_source",
    "product_grid",
    "random_directions",
    "render_source",
    "reverberant_tail",
    "ring_field",
    "scenario_preset",
    "speech_surrogate",
    "spectral_plane_waves",
    "sweep",
    "synthesize",
    "t60_ratio_db",
    "table1_full",
    "table1_mini",
    "table1_reduced",
    "wav_source",
]
