"""Scenario pipeline: simulate, estimate, beamform, score.

Every stage reads its inputs from and writes its outputs to one scenario
directory, so each stage can be re-run on its own::

    <output>/<scenario id>/
        manifest.json           scenario config, array, ground truth
        components/<name>.wav   separately stored components
        covariance.bin/.json    observed covariances
        estimates.jsonl         joint estimator trace
        estimate.json           interferer directions of every estimator
        ncm.bin/.json           noise covariance and variances
        music.csv               MUSIC pseudospectra (optional)
        weights/<method>.bin    beamformer weights
        filtered/<method>.wav   beamformer outputs
        metrics.csv             rows of this scenario
    <output>/metrics.csv        merged rows of every scenario
"""

import logging
import os
from collections.abc import Callable, Iterable, Iterator
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Any

from rich.progress import Progress

from .. import defaults
from ..beamforming import (
    BeamformerMethod,
    BeamformerWeights,
    ConstraintSet,
    MusicEstimator,
    lcmp,
    lcmv,
    mvdr,
    write_spectrum_csv,
)
from ..estimation import BinCovarianceSet, NoiseCovariance, joint_estimate, write_trace
from ..evaluation import (
    CSV_FIELDS,
    EnhancementReport,
    build_report,
    filter_components,
    read_rows,
    write_metrics_csv,
    write_rows,
)
from ..exceptions import ConfigLoadError, StageError
from ..geometry import DoA, steering_vector
from ..simulation import (
    ScenarioConfig,
    ScenarioSignals,
    export_scenario,
    load_scenario,
    sweep,
    synthesize,
)
from ..spectral import StftConfig, filter_signal, stft
from ..storage import read_json, write_json, write_wav
from .config import EstimatorSettings, Method, RunConfig

logger = logging.getLogger(__name__)

STAGES: tuple[str, ...] = ("simulate", "estimate", "beamform", "metrics")


def scenario_directory(output: Path, scenario_id: str) -> Path:
    return Path(output) / scenario_id


def simulate_stage(cfg: ScenarioConfig, directory: Path) -> ScenarioSignals:
    """Render a scenario and export it to ``directory``.

    Raises:
        ScenarioError: If the scenario cannot be rendered (from synthesize).
        CannotWriteAudioError: If a component cannot be written (from export_scenario).
    """
    signals = synthesize(cfg)
    export_scenario(signals, directory)
    return signals


def simulate_grid(grid: Iterable[ScenarioConfig], output: Path) -> Iterator[Path]:
    """Render and export every scenario of ``grid``, in grid order.

    Yields:
        Path: Directory of each exported scenario.

    Raises:
        StageError: If a scenario cannot be rendered or written.
    """
    grid = list(grid)
    scenes = sweep(grid)
    for cfg in grid:
        signals = run_stage(cfg.scenario_id, "simulate", lambda: next(scenes)[1])
        directory = scenario_directory(output, cfg.scenario_id)
        run_stage(
            cfg.scenario_id, "simulate", lambda: export_scenario(signals, directory)
        )
        logger.debug(f"Exported {cfg.scenario_id} to {directory}")
        yield directory



def _doa_document(doa: DoA | None) -> dict[str, float] | None:
    if doa is None:
        return None
    return {"azimuth_deg": doa.azimuth_deg, "elevation_deg": doa.elevation_deg}


def _doa(document: dict[str, float] | None) -> DoA | None:
    if document is None:
        return None
    return DoA.from_degrees(document["azimuth_deg"], document["elevation_deg"])


def estimate_stage(
    directory: Path, settings: EstimatorSettings, methods: tuple[Method, ...]
) -> dict[str, Any]:
    """Estimate the interferer direction with every estimator the methods need.

    Writes ``covariance``, ``estimate.json`` and, for NCM methods,
    ``estimates.jsonl`` and ``ncm``.

    Returns:
        dict: The ``estimate.json`` document.

    Raises:
        InvalidScenarioError: If the scenario cannot be read (from load_scenario).
        EstimationError: If the joint estimator fails (from joint_estimate).
        MusicError: If MUSIC finds no admissible peak (from MusicEstimator.estimate).
    """
    directory = Path(directory)
    signals = load_scenario(directory)
    array = signals.array
    frames = stft(signals.mixture, StftConfig.for_bins(array.bins))
    comps = BinCovarianceSet.from_frames(
        frames, array, signals.desired_doa, epsilon=settings.epsilon
    )
    comps.export(directory / "covariance")

    summary: dict[str, Any] = {
        "scenario_id": signals.scenario_id,
        "truth": _doa_document(signals.interferer_doa),
    }
    estimators = {method.estimator for method in methods}
    if "ncm" in estimators:
        estimate = joint_estimate(comps, settings.estimator_config())
        write_trace(directory / "estimates.jsonl", estimate)
        estimate.ncm.export(directory / "ncm", estimate.variances)
        summary["ncm"] = {
            **_doa_document(estimate.doa),
            "cost": estimate.cost,
            "iterations": estimate.iterations,
            "gradient_norm": estimate.gradient_norm,
            "converged": estimate.converged,
            "low_confidence": estimate.low_confidence,
        }
    if "music" in estimators:
        music = MusicEstimator(array, sources=settings.music_sources).estimate(
            comps.observed, signals.desired_doa, comps.bins
        )
        if settings.save_spectrum:
            write_spectrum_csv(directory / "music.csv", music.spectrum)
        summary["msc"] = _doa_document(music.msc.doa)
        summary["wmsc"] = _doa_document(music.wmsc.doa)
        summary["music_valid_bins"] = int(music.wmsc.valid.sum())

    write_json(directory / "estimate.json", summary)
    logger.debug(f"Estimated {signals.scenario_id} with {sorted(estimators)}")
    return summary


def estimated_doa(summary: dict[str, Any], method: Method) -> DoA:
    """Interferer direction a method uses, from an ``estimate.json`` document.

    NCM methods use the joint estimate, MUSIC-LCMP and wMSC the weighted
    MUSIC average, MSC the plain one.

    Raises:
        ConfigLoadError: If the estimate the method needs is missing.
    """
    key = {
        Method.NCM_LCMV: "ncm",
        Method.NCM_MVDR: "ncm",
        Method.MUSIC_LCMP: "wmsc",
        Method.MSC: "msc",
        Method.WMSC: "wmsc",
    }[method]
    document = summary.get(key)
    if document is None:
        raise ConfigLoadError(f"No {key!r} estimate available for {method.code}")
    return _doa(document)


def design_weights(
    directory: Path,
    method: Method,
    settings: EstimatorSettings,
    signals: ScenarioSignals,
    summary: dict[str, Any],
) -> BeamformerWeights:
    """Build the weights of a beamforming method from persisted estimates.

    Raises:
        ConfigLoadError: If ``method`` has no beamformer or its estimate is missing.
        MatrixFileLoadError: If a covariance file is missing.
        BeamformerError: If the covariance is not positive definite.
    """
    array = signals.array
    desired = signals.desired_doa
    match method.beamformer:
        case BeamformerMethod.LCMV:
            ncm = NoiseCovariance.load(directory / "ncm")
            cs = ConstraintSet.from_doas(
                array, desired, estimated_doa(summary, method), ncm.bins
            )
            return lcmv(ncm, cs, on_collision="distortionless")
        case BeamformerMethod.MVDR:
            ncm = NoiseCovariance.load(directory / "ncm")
            return mvdr(
                ncm, steering_vector(array, desired, ncm.bins), form=settings.mvdr_form
            )
        case BeamformerMethod.LCMP:
            comps = BinCovarianceSet.load(directory / "covariance")
            cs = ConstraintSet.from_doas(
                array, desired, estimated_doa(summary, method), comps.bins
            )
            return lcmp(
                comps.observed,
                cs,
                epsilon=settings.epsilon,
                on_collision="distortionless",
            )
        case _:
            raise ConfigLoadError(f"Method {method.code} has no beamformer")


def beamform_stage(
    directory: Path, method: Method, settings: EstimatorSettings
) -> BeamformerWeights:
    """Design and apply one beamformer; writes ``weights/`` and ``filtered/``.

    Raises:
        ConfigLoadError: If ``estimate.json`` is missing or lacks the estimate.
        MatrixFileLoadError: If a covariance file is missing.
        BeamformerError: If the weights cannot be built.
    """
    directory = Path(directory)
    signals = load_scenario(directory)
    summary = read_json(directory / "estimate.json")
    weights = design_weights(directory, method, settings, signals, summary)
    if weights.collided_bins:
        logger.warning(
            f"{signals.scenario_id} {method.code}: constraints collide in bins "
            f"{list(weights.collided_bins)}; used distortionless weights there"
        )
    (directory / "weights").mkdir(exist_ok=True)
    (directory / "filtered").mkdir(exist_ok=True)
    weights.export(directory / "weights" / method.code)
    output = filter_signal(
        signals.mixture, weights, StftConfig.for_bins(signals.array.bins)
    )
    write_wav(
        directory / "filtered" / f"{method.code}.wav",
        output,
        rate=int(signals.array.sampling_rate),
    )
    return weights


def metrics_stage(
    directory: Path, methods: tuple[Method, ...]
) -> list[EnhancementReport]:
    """Score every method of a scenario; writes the partial ``metrics.csv``.

    Raises:
        ConfigLoadError: If ``estimate.json`` is missing or lacks an estimate.
        MatrixFileLoadError: If a weights file is missing.
        MetricsError: If the CSV cannot be written.
    """
    directory = Path(directory)
    signals = load_scenario(directory)
    summary = read_json(directory / "estimate.json")
    reports = []
    for method in methods:
        estimate = estimated_doa(summary, method)
        if method.beamformer is None:
            reports.append(
                build_report(
                    signals.scenario_id,
                    method.code,
                    signals.config.parameters,
                    estimate=estimate,
                    truth=signals.interferer_doa,
                )
            )
            continue
        weights = BeamformerWeights.load(directory / "weights" / method.code)
        reports.append(
            build_report(
                signals.scenario_id,
                method.code,
                signals.config.parameters,
                components=filter_components(signals, weights),
                weights=weights,
                array=signals.array,
                estimate=estimate,
                truth=signals.interferer_doa,
            )
        )
    write_metrics_csv(directory / "metrics.csv", reports)
    return reports


def run_stage(scenario_id: str, stage: str, action: Callable[[], Any]) -> Any:
    """Call ``action``, converting any failure into a StageError.

    Raises:
        StageError: If ``action`` raises.
    """
    try:
        return action()
    except StageError:
        raise
    except Exception as e:
        raise StageError(scenario_id, stage, f"{type(e).__name__}: {e}") from e


def run_scenario(cfg: ScenarioConfig, run: RunConfig) -> Path:
    """Run every stage of one scenario in order.

    Returns:
        Path: The scenario's partial metrics CSV.

    Raises:
        StageError: If any stage fails, naming the scenario and the stage.
    """
    directory = scenario_directory(run.output, cfg.scenario_id)
    methods = run.selected
    settings = run.estimator
    run_stage(cfg.scenario_id, "simulate", lambda: simulate_stage(cfg, directory))
    run_stage(
        cfg.scenario_id,
        "estimate",
        lambda: estimate_stage(directory, settings, methods),
    )
    for method in methods:
        if method.beamformer is not None:
            run_stage(
                cfg.scenario_id,
                "beamform",
                lambda: beamform_stage(directory, method, settings),
            )
    run_stage(cfg.scenario_id, "metrics", lambda: metrics_stage(directory, methods))
    return directory / "metrics.csv"


def worker_count() -> int:
    """Pool size from the worker environment variable; 1 when unset.

    Raises:
        ConfigLoadError: If the variable is not a positive integer.
    """
    raw = os.environ.get(defaults.workers_env, "1")
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        raise ConfigLoadError(
            f"{defaults.workers_env} must be a positive integer, got {raw!r}"
        )
    return workers


def merge_metrics(partials: list[Path], destination: Path) -> Path:
    """Concatenate partial metrics CSVs sorted by scenario id and method.

    Raises:
        MetricsError: If a partial cannot be read or the result cannot be written.
    """
    rows = [row for path in partials for row in read_rows(path)]
    rows.sort(key=lambda row: (row["scenario_id"], row["method"]))
    return write_rows(destination, rows, CSV_FIELDS)


def run_pipeline(
    run: RunConfig, *, workers: int | None = None, progress: bool = True
) -> int:
    """Run every scenario of a run config and merge the metrics.

    Args:
        run: Validated run config.
        workers: Process count; read from the environment when None.
        progress: Show a progress bar.

    Returns:
        int: 0 when every scenario succeeded, 2 otherwise.

    Raises:
        ConfigError: If the grid or the worker count is invalid.
    """
    grid = run.grid()
    workers = worker_count() if workers is None else workers
    output = Path(run.output)
    output.mkdir(parents=True, exist_ok=True)
    write_json(output / "run.json", run.model_dump(mode="json"))
    logger.info(f"Running {len(grid)} scenarios with {workers} workers into {output}")

    partials: dict[str, Path] = {}
    failures: list[StageError] = []
    with Progress(disable=not progress) as bar:
        task = bar.add_task("scenarios", total=len(grid))
        if workers == 1:
            for cfg in grid:
                try:
                    partials[cfg.scenario_id] = run_scenario(cfg, run)
                except StageError as e:
                    failures.append(e)
                    logger.error(str(e))
                bar.advance(task)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(run_scenario, cfg, run): cfg for cfg in grid}
                for future in as_completed(futures):
                    cfg = futures[future]
                    try:
                        partials[cfg.scenario_id] = future.result()
                    except StageError as e:
                        failures.append(e)
                        logger.error(str(e))
                    bar.advance(task)

    merge_metrics([partials[key] for key in sorted(partials)], output / "metrics.csv")
    if failures:
        failed = sorted(e.scenario_id for e in failures)
        logger.error(f"{len(failures)} of {len(grid)} scenarios failed: {failed}")
        return 2
    return 0


__all__ = [
    "STAGES",
    "beamform_stage",
    "design_weights",
    "estimate_stage",
    "estimated_doa",
    "merge_metrics",
    "metrics_stage",
    "run_pipeline",
    "run_scenario",
    "run_stage",
    "scenario_directory",
    "simulate_grid",
    "simulate_stage",
    "worker_count",
]
