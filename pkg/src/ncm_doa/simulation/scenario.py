"""Scenario configuration, synthesis, export and import.

A scenario renders six separately stored components on the array:

- ``desired``: direct path of the desired source.
- ``interferer``: direct path of the interfering source.
- ``desired_reverb`` / ``interferer_reverb``: isotropic late fields of each source.
- ``ring``: eight correlated harmonic point sources on a 1 m circle.
- ``white``: independent sensor noise.

Power ratios are measured on the reference sensor against the desired
direct path and calibrated exactly: SIR against the full interferer
(direct path plus its reverberation), SCR against the ring.
"""

import hashlib
import logging
import math
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .. import defaults
from ..exceptions import ConfigLoadError, InvalidScenarioError
from ..geometry import ArrayDocument, DoA, SensorArray, load_array
from ..storage import read_json, read_wav, write_json, write_wav
from .diffuse import reverberant_tail, t60_ratio_db
from .propagation import plane_wave, point_source
from .sources import Voice, harmonic_surrogate, render_source

logger = logging.getLogger(__name__)

COMPONENTS: tuple[str, ...] = (
    "desired",
    "interferer",
    "desired_reverb",
    "interferer_reverb",
    "ring",
    "white",
)
"""tuple[str, ...]: Component names in summation order."""

RING_FUNDAMENTALS: tuple[float, ...] = tuple(
    130.81 * 2 ** (2 * n / 12) for n in range(defaults.ring_sources)
)
"""tuple[float, ...]: Whole-tone spaced fundamentals of the ring sources in Hz."""


class ScenarioConfig(BaseModel):
    """One point of the evaluation grid.

    Angles are in degrees, distances in meters, ratios in dB. The
    diffuse-to-direct ratio follows T60 alone unless ``ddr_distance`` is set.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    t60_ms: float = Field(default=0.0, ge=0)
    desired_distance: float = Field(default=1.5, gt=0)
    interferer_distance: float = Field(default=1.5, gt=0)
    interferer_azimuth: float = 30.0
    sir_db: float = Field(default=0.0, allow_inf_nan=False)
    scr_db: float = Field(default=5.0, allow_inf_nan=False)
    desired_azimuth: float = 0.0
    white_db: float = Field(default=defaults.white_level_db, allow_inf_nan=False)
    seed: int = 0
    duration: float = Field(default=defaults.scenario_duration, gt=0)
    desired_source: str = "speech"
    interferer_source: str = "speech"
    voice_swap: bool = False
    array: str = "ura-4x4"
    ddr_distance: bool = False

    @property
    def scenario_id(self) -> str:
        return (
            f"t{self.t60_ms:g}-dx{self.desired_distance:g}-dp{self.interferer_distance:g}"
            f"-sir{self.sir_db:g}-scr{self.scr_db:g}-az{self.interferer_azimuth:g}"
            f"-s{self.seed}"
        )

    @property
    def parameters(self) -> dict[str, float]:
        """The six swept parameters, keyed by report column."""
        return {
            "t60_ms": self.t60_ms,
            "desired_distance": self.desired_distance,
            "interferer_distance": self.interferer_distance,
            "sir_db": self.sir_db,
            "scr_db": self.scr_db,
            "interferer_azimuth": self.interferer_azimuth,
        }

    @property
    def voices(self) -> tuple[Voice, Voice]:
        """Voices of (desired, interferer)."""
        return ("high", "low") if self.voice_swap else ("low", "high")

    def config_hash(self) -> int:
        """Stable 64-bit hash of every field except the seed."""
        text = self.model_dump_json(exclude={"seed"})
        return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence([self.seed, self.config_hash()])


def load_scenario_config(path: Path) -> ScenarioConfig:
    """Read a scenario config JSON document.

    Raises:
        ConfigLoadError: If the file is missing, malformed or invalid. This
            wraps pydantic.ValidationError.
    """
    data = read_json(path)
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigLoadError(f"An error occurred: {e}") from e


@dataclass(frozen=True, eq=False)
class ScenarioSignals:
    """Rendered components of a scenario with ground truth.

    Attributes:
        config: Scenario configuration.
        array: Sensor array.
        components: ``(M, T)`` signals keyed by name.
        ratios: Measured ratios in dB on the reference sensor.
    """

    config: ScenarioConfig
    array: SensorArray
    components: dict[str, np.ndarray]
    ratios: dict[str, float] = field(default_factory=dict)

    @property
    def scenario_id(self) -> str:
        return self.config.scenario_id

    @property
    def desired_doa(self) -> DoA:
        return DoA.from_degrees(self.config.desired_azimuth)

    @property
    def interferer_doa(self) -> DoA:
        return DoA.from_degrees(self.config.interferer_azimuth)

    @property
    def n_samples(self) -> int:
        return next(iter(self.components.values())).shape[-1]

    @property
    def mixture(self) -> np.ndarray:
        return np.sum([self.components[name] for name in COMPONENTS], axis=0)

    def component(self, name: str) -> np.ndarray:
        """Return one component.

        Raises:
            InvalidScenarioError: If the name is unknown.
        """
        try:
            return self.components[name]
        except KeyError:
            raise InvalidScenarioError(f"Unknown component {name!r}") from None

    def group(self, *names: str) -> np.ndarray:
        """Sum of several components."""
        return np.sum([self.component(name) for name in names], axis=0)


def _power(signal: np.ndarray) -> float:
    return float(np.var(signal))


def _db(numerator: float, denominator: float) -> float:
    if denominator <= 0:
        return math.inf
    if numerator <= 0:
        return -math.inf
    return 10.0 * math.log10(numerator / denominator)


def _gain(reference: float, ratio_db: float, measured: float) -> float:
    """Amplitude gain giving ``reference / (gain^2 measured) = 10^(ratio_db / 10)``."""
    if measured <= 0:
        return 1.0
    return math.sqrt(reference / measured * 10.0 ** (-ratio_db / 10.0))


def _with_reverb(direct, source, array, cfg, distance, rng):
    target = t60_ratio_db(cfg.t60_ms, distance if cfg.ddr_distance else None)
    late = reverberant_tail(source, array, cfg.t60_ms, rng)
    ref = array.reference
    if math.isinf(target):
        return np.zeros_like(direct)
    return late * _gain(_power(direct[ref]), -target, _power(late[ref]))


def ring_field(
    array: SensorArray,
    n_samples: int,
    rng: np.random.Generator,
    *,
    radius: float = defaults.ring_radius,
) -> np.ndarray:
    """Ring sources, uncalibrated, shape ``(M, T)``.

    The sources sit on a horizontal circle of ``radius`` meters around the
    array centroid and are rendered as spherical waves.
    """
    center = array.positions.mean(axis=0)
    total = np.zeros((array.n_sensors, n_samples))
    for n, fundamental in enumerate(RING_FUNDAMENTALS):
        doa = DoA(math.pi / defaults.ring_sources * (2 * n + 1))
        signal = harmonic_surrogate(
            n_samples, rng, fundamental=fundamental, rate=array.sampling_rate
        )
        total += point_source(signal, array, center + radius * doa.unit_vector)
    return total


def synthesize(cfg: ScenarioConfig, array: SensorArray | None = None) -> ScenarioSignals:
    """Render a scenario.

    Args:
        cfg: Scenario configuration.
        array: Sensor array; ``cfg.array`` is loaded when None.

    Returns:
        ScenarioSignals: Calibrated components.

    Raises:
        AliasingError: If a harmonic source exceeds the Nyquist frequency.
        InvalidScenarioError: If a source kind is unknown.
        UnknownPresetError: If ``cfg.array`` is not a preset or a file (from load_array).
    """
    array = array or load_array(cfg.array)
    n = int(round(cfg.duration * array.sampling_rate))
    streams = [np.random.default_rng(s) for s in cfg.seed_sequence().spawn(6)]
    ref = array.reference
    voice_desired, voice_interferer = cfg.voices

    desired_source = render_source(
        cfg.desired_source, n, streams[0], voice=voice_desired, rate=array.sampling_rate
    )
    interferer_source = render_source(
        cfg.interferer_source,
        n,
        streams[1],
        voice=voice_interferer,
        rate=array.sampling_rate,
    )
    desired = plane_wave(desired_source, array, DoA.from_degrees(cfg.desired_azimuth))
    interferer = plane_wave(
        interferer_source, array, DoA.from_degrees(cfg.interferer_azimuth)
    )
    desired_reverb = _with_reverb(
        desired, desired_source, array, cfg, cfg.desired_distance, streams[2]
    )
    interferer_reverb = _with_reverb(
        interferer, interferer_source, array, cfg, cfg.interferer_distance, streams[3]
    )

    reference = _power(desired[ref])
    total_interferer = _power(interferer[ref] + interferer_reverb[ref])
    gain = _gain(reference, cfg.sir_db, total_interferer)
    interferer = interferer * gain
    interferer_reverb = interferer_reverb * gain

    ring = ring_field(array, n, streams[4])
    ring = ring * _gain(reference, cfg.scr_db, _power(ring[ref]))

    white = streams[5].standard_normal((array.n_sensors, n))
    white *= math.sqrt(reference * 10.0 ** (cfg.white_db / 10.0))

    components = {
        "desired": desired,
        "interferer": interferer,
        "desired_reverb": desired_reverb,
        "interferer_reverb": interferer_reverb,
        "ring": ring,
        "white": white,
    }
    ratios = measure_ratios(components, ref)
    logger.debug(
        f"Synthesized {cfg.scenario_id}: SIR {ratios['sir_db']:.2f} dB, "
        f"SCR {ratios['scr_db']:.2f} dB"
    )
    return ScenarioSignals(config=cfg, array=array, components=components, ratios=ratios)


def measure_ratios(components: dict[str, np.ndarray], ref: int = 0) -> dict[str, float]:
    """Ratios of the desired direct path to each contamination on one sensor."""
    desired = _power(components["desired"][ref])
    interferer = components["interferer"][ref] + components["interferer_reverb"][ref]
    return {
        "sir_db": _db(desired, _power(interferer)),
        "scr_db": _db(desired, _power(components["ring"][ref])),
        "white_db": _db(_power(components["white"][ref]), desired),
        "desired_ddr_db": _db(_power(components["desired_reverb"][ref]), desired),
        "interferer_ddr_db": _db(
            _power(components["interferer_reverb"][ref]),
            _power(components["interferer"][ref]),
        ),
    }


def sweep(
    grid: Iterable[ScenarioConfig], array: SensorArray | None = None
) -> Iterator[tuple[ScenarioConfig, ScenarioSignals]]:
    """Render scenarios lazily, in grid order."""
    for cfg in grid:
        yield cfg, synthesize(cfg, array)


def export_scenario(signals: ScenarioSignals, directory: Path) -> Path:
    """Write ``manifest.json`` and ``components/<name>.wav`` under ``directory``.

    Raises:
        CannotWriteAudioError: If a WAV file cannot be written (from write_wav).
        ConfigWriteError: If the manifest cannot be written (from write_json).
    """
    directory = Path(directory)
    (directory / "components").mkdir(parents=True, exist_ok=True)
    rate = int(signals.array.sampling_rate)
    for name, data in signals.components.items():
        write_wav(directory / "components" / f"{name}.wav", data, rate=rate)
    manifest = {
        "id": signals.scenario_id,
        "config": signals.config.model_dump(),
        "array": signals.array.to_document(),
        "array_name": signals.array.name,
        "desired_doa_deg": [signals.config.desired_azimuth, 0.0],
        "interferer_doa_deg": [signals.config.interferer_azimuth, 0.0],
        "ratios": signals.ratios,
        "sir_denominator": "interferer + interferer_reverb",
        "components": list(signals.components),
        "seed_entropy": [signals.config.seed, signals.config.config_hash()],
    }
    write_json(directory / "manifest.json", manifest)
    logger.debug(f"Exported scenario {signals.scenario_id} to {directory}")
    return directory


def load_scenario(directory: Path) -> ScenarioSignals:
    """Read a scenario written by :func:`export_scenario` or laid out alike.

    Components missing from ``components/`` are treated as silent; the
    desired and interferer components are required.

    Raises:
        InvalidScenarioError: If the manifest is missing or invalid, or a
            required component is absent.
        UnsupportedSampleRateError: If a WAV file is not at the array rate.
    """
    directory = Path(directory)
    manifest = read_json(directory / "manifest.json", error=InvalidScenarioError)
    try:
        cfg = ScenarioConfig.model_validate(manifest["config"])
        array = ArrayDocument.model_validate(manifest["array"]).to_array(
            manifest.get("array_name")
        )
    except (KeyError, ValidationError) as e:
        raise InvalidScenarioError(f"An error occurred: {e}") from e

    rate = int(array.sampling_rate)
    components: dict[str, np.ndarray] = {}
    for name in COMPONENTS:
        path = directory / "components" / f"{name}.wav"
        if path.exists():
            components[name] = read_wav(path, rate=rate)
        elif name in ("desired", "interferer"):
            raise InvalidScenarioError(f"Required component {name!r} missing in {directory}")
    shape = components["desired"].shape
    for name in COMPONENTS:
        components.setdefault(name, np.zeros(shape))
    if any(c.shape != shape for c in components.values()):
        raise InvalidScenarioError(f"Components of {directory} differ in shape")
    return ScenarioSignals(
        config=cfg,
        array=array,
        components=components,
        ratios=measure_ratios(components, array.reference),
    )


__all__ = [
    "COMPONENTS",
    "RING_FUNDAMENTALS",
    "ScenarioConfig",
    "ScenarioSignals",
    "export_scenario",
    "load_scenario",
    "load_scenario_config",
    "measure_ratios",
    "ring_field",
    "synthesize",
    "sweep",
]
