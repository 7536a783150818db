"""Run configuration documents.

A run config is a single versioned JSON document::

    {
        "version": 1,
        "array": "ura-4x4",
        "scenarios": "table1-mini",
        "seed": 7,
        "duration": 4.0,
        "estimator": {"epsilon": 1e-4, "starts": 8},
        "methods": ["NCM-LCMV", "NCM-MVDR", "MUSIC-LCMP", "MSC", "wMSC"],
        "output": "runs/mini"
    }

``scenarios`` is either a preset name or a list of scenario documents;
their missing fields fall back to the run's seed, duration and array.
"""

import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .. import defaults
from ..beamforming import BeamformerMethod
from ..estimation import DescentConfig, EstimatorConfig, GradientForm
from ..exceptions import ConfigLoadError, UnknownParameterError
from ..geometry import ARRAY_PRESETS, DoA
from ..simulation import SCENARIO_PRESETS, ScenarioConfig, scenario_preset
from ..storage import read_json
from ..suggest import did_you_mean

logger = logging.getLogger(__name__)


class Method(Enum):
    """Pipeline methods.

    Each value is ``(code, interferer estimator, beamformer)``; DoA-only
    methods have no beamformer.
    """

    NCM_LCMV = ("NCM-LCMV", "ncm", BeamformerMethod.LCMV)
    NCM_MVDR = ("NCM-MVDR", "ncm", BeamformerMethod.MVDR)
    MUSIC_LCMP = ("MUSIC-LCMP", "music", BeamformerMethod.LCMP)
    MSC = ("MSC", "music", None)
    WMSC = ("wMSC", "music", None)

    @property
    def code(self) -> str:
        return self.value[0]

    @property
    def estimator(self) -> str:
        return self.value[1]

    @property
    def beamformer(self) -> BeamformerMethod | None:
        return self.value[2]

    @classmethod
    def from_code(cls, code: str) -> "Method | None":
        for method in cls:
            if method.code == code:
                return method
        return None

    @classmethod
    def resolve(cls, code: str) -> "Method":
        """Look up a method by code.

        Raises:
            UnknownParameterError: If the code is unknown.
        """
        method = cls.from_code(code)
        if method is None:
            raise UnknownParameterError(
                f"Unknown method {code!r}." + did_you_mean(code, [m.code for m in cls])
            )
        return method


class EstimatorSettings(BaseModel):
    """Tunable parameters of the joint estimator and the beamformers.

    Angles are in degrees.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    epsilon: float = Field(default=defaults.epsilon, gt=0)
    step: float = Field(default=math.degrees(defaults.descent_step), gt=0)
    tolerance: float = Field(default=defaults.descent_tolerance, gt=0)
    max_iterations: int = Field(default=defaults.descent_max_iterations, ge=1)
    max_outer: int = Field(default=defaults.joint_max_outer, ge=1)
    inner_iterations: int = Field(default=defaults.joint_inner_iterations, ge=1)
    starts: int = Field(default=defaults.multi_starts, ge=1)
    initial_azimuth: float | None = None
    exclusion_radius: float = Field(
        default=math.degrees(defaults.exclusion_radius), ge=0
    )
    form: str = GradientForm.FULL.code
    estimate_elevation: bool = False
    min_bin: int = Field(default=defaults.estimation_min_bin, ge=0)
    max_bin: int | None = None
    mvdr_form: Literal["standard", "printed"] = "standard"
    music_sources: int = Field(default=defaults.music_sources, ge=1)
    save_spectrum: bool = False

    @field_validator("form")
    @classmethod
    def _known_form(cls, value: str) -> str:
        if GradientForm.from_code(value) is None:
            raise ValueError(f"Unknown gradient form {value!r}")
        return value

    def estimator_config(self) -> EstimatorConfig:
        """Estimator parameters in radians.

        Raises:
            EstimationError: If the descent parameters are inconsistent.
        """
        initial = (
            None
            if self.initial_azimuth is None
            else DoA.from_degrees(self.initial_azimuth)
        )
        descent = DescentConfig(
            initial=initial,
            step=math.radians(self.step),
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            starts=self.starts,
            estimate_elevation=self.estimate_elevation,
            exclusion_radius=math.radians(self.exclusion_radius),
            form=GradientForm.from_code(self.form),
        )
        return EstimatorConfig(
            descent=descent,
            max_outer=self.max_outer,
            inner_iterations=self.inner_iterations,
            min_bin=self.min_bin,
            max_bin=self.max_bin,
        )


class RunConfig(BaseModel):
    """Versioned description of a pipeline run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    version: Literal[1] = defaults.run_config_version
    array: str = "ura-4x4"
    scenarios: str | list[dict[str, Any]] = "table1-mini"
    seed: int = 0
    duration: float = Field(default=defaults.scenario_duration, gt=0)
    estimator: EstimatorSettings = Field(default_factory=EstimatorSettings)
    methods: list[str] = Field(
        default_factory=lambda: [m.code for m in Method], min_length=1
    )
    output: Path = Path("runs")

    @field_validator("methods")
    @classmethod
    def _known_methods(cls, value: list[str]) -> list[str]:
        for code in value:
            try:
                Method.resolve(code)
            except UnknownParameterError as e:
                raise ValueError(str(e)) from e
        return list(dict.fromkeys(value))

    @field_validator("scenarios")
    @classmethod
    def _known_preset(cls, value: str | list[dict[str, Any]]):
        if isinstance(value, str) and value not in SCENARIO_PRESETS:
            raise ValueError(
                f"Unknown scenario preset {value!r}."
                + did_you_mean(value, SCENARIO_PRESETS)
            )
        if isinstance(value, list) and not value:
            raise ValueError("At least one scenario is required")
        return value

    @field_validator("array")
    @classmethod
    def _known_array(cls, value: str) -> str:
        if value in ARRAY_PRESETS or Path(value).exists():
            return value
        raise ValueError(
            f"Array {value!r} is neither a preset nor an existing file."
            + did_you_mean(value, ARRAY_PRESETS)
        )

    @property
    def selected(self) -> tuple[Method, ...]:
        return tuple(Method.resolve(code) for code in self.methods)

    def grid(self) -> list[ScenarioConfig]:
        """Expand the scenario grid of this run.

        Raises:
            UnknownPresetError: If the preset name is unknown.
            ConfigLoadError: If an inline scenario is invalid.
        """
        common = {"seed": self.seed, "duration": self.duration, "array": self.array}
        if isinstance(self.scenarios, str):
            return scenario_preset(
                self.scenarios, seed=self.seed, duration=self.duration, array=self.array
            )
        try:
            return [
                ScenarioConfig.model_validate(common | entry)
                for entry in self.scenarios
            ]
        except ValidationError as e:
            raise ConfigLoadError(f"An error occurred: {e}") from e


def load_run_config(path: Path) -> RunConfig:
    """Read and validate a run config.

    A relative array path is resolved against the config's directory.

    Raises:
        ConfigLoadError: If the file is missing, malformed, of another
            version, or invalid. This wraps pydantic.ValidationError.
    """
    path = Path(path)
    data = read_json(path)
    if not isinstance(data, dict):
        raise ConfigLoadError(f"Run config at {path} is not a JSON object")
    array = data.get("array")
    if isinstance(array, str) and array not in ARRAY_PRESETS:
        candidate = Path(array)
        if not candidate.is_absolute():
            data["array"] = str(path.parent / candidate)
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigLoadError(f"An error occurred: {e}") from e
    logger.debug(f"Loaded run config {path} with methods {cfg.methods}")
    return cfg


def is_run_config(data: Any) -> bool:
    """Whether a JSON document is a run config rather than a scenario config."""
    return isinstance(data, dict) and ("version" in data or "scenarios" in data)


def load_config(path: Path) -> RunConfig:
    """Read either a run config or a single scenario config.

    A scenario config becomes a one-scenario run with default settings.

    Raises:
        ConfigLoadError: If the document is invalid as either kind.
    """
    data = read_json(path)
    if is_run_config(data):
        return load_run_config(path)
    try:
        scenario = ScenarioConfig.model_validate(data)
        return RunConfig(
            array=scenario.array,
            scenarios=[scenario.model_dump()],
            seed=scenario.seed,
            duration=scenario.duration,
        )
    except ValidationError as e:
        raise ConfigLoadError(f"An error occurred: {e}") from e


__all__ = [
    "EstimatorSettings",
    "Method",
    "RunConfig",
    "is_run_config",
    "load_config",
    "load_run_config",
]
