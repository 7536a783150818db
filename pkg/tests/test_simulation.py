import math

import numpy as np
import pytest
from pydantic import ValidationError

from ncm_doa.estimation import sample_covariance
from ncm_doa.exceptions import (
    AliasingError,
    InvalidScenarioError,
    UnknownPresetError,
)
from ncm_doa.geometry import DoA, SensorArray, ula
from ncm_doa.simulation import (
    COMPONENTS,
    ScenarioConfig,
    delay_signal,
    diffuse_field,
    export_scenario,
    harmonic_surrogate,
    load_scenario,
    plane_wave,
    point_source,
    ring_field,
    scenario_preset,
    speech_surrogate,
    sweep,
    synthesize,
    t60_ratio_db,
)
from ncm_doa.simulation.scenario import RING_FUNDAMENTALS
from ncm_doa.spectral import StftConfig, stft


@pytest.fixture
def short():
    return ScenarioConfig(
        interferer_azimuth=50.0, sir_db=-10.0, scr_db=5.0, duration=1.0, seed=3
    )


@pytest.fixture
def reverberant():
    return ScenarioConfig(
        t60_ms=500.0, interferer_distance=3.0, sir_db=5.0, scr_db=0.0, duration=1.0
    )


@pytest.mark.parametrize("cfg_name", ["short", "reverberant"])
def test_ratios_are_calibrated(request, cfg_name):
    cfg = request.getfixturevalue(cfg_name)
    signals = synthesize(cfg)
    assert signals.ratios["sir_db"] == pytest.approx(cfg.sir_db, abs=0.1)
    assert signals.ratios["scr_db"] == pytest.approx(cfg.scr_db, abs=0.1)
    assert signals.ratios["white_db"] == pytest.approx(cfg.white_db, abs=0.5)


def test_anechoic_scene_has_no_reverberation(short):
    signals = synthesize(short)
    assert set(signals.components) == set(COMPONENTS)
    np.testing.assert_array_equal(signals.component("desired_reverb"), 0.0)
    np.testing.assert_array_equal(signals.component("interferer_reverb"), 0.0)
    assert signals.ratios["desired_ddr_db"] == -math.inf


def test_reverberation_follows_t60(reverberant):
    signals = synthesize(reverberant)
    assert signals.ratios["desired_ddr_db"] == pytest.approx(-5.0, abs=0.06)
    assert signals.ratios["interferer_ddr_db"] == pytest.approx(
        signals.ratios["desired_ddr_db"], abs=0.01
    )


def test_distance_scaled_reverberation(reverberant):
    signals = synthesize(reverberant.model_copy(update={"ddr_distance": True}))
    assert signals.ratios["desired_ddr_db"] == pytest.approx(
        t60_ratio_db(500.0, 1.5), abs=0.01
    )
    assert signals.ratios["interferer_ddr_db"] == pytest.approx(
        t60_ratio_db(500.0, 3.0), abs=0.01
    )


def test_mixture_is_the_component_sum(short):
    signals = synthesize(short)
    assert signals.mixture.shape == (16, 16000)
    np.testing.assert_allclose(
        signals.mixture, signals.group(*COMPONENTS), atol=1e-12
    )
    with pytest.raises(InvalidScenarioError):
        signals.component("music")


def test_synthesis_is_deterministic(short):
    first = synthesize(short)
    second = synthesize(short)
    for name in COMPONENTS:
        np.testing.assert_array_equal(first.components[name], second.components[name])
    other = synthesize(short.model_copy(update={"seed": 4}))
    assert not np.allclose(first.components["desired"], other.components["desired"])


def test_scenario_identity(short):
    assert short.scenario_id == "t0-dx1.5-dp1.5-sir-10-scr5-az50-s3"
    assert short.config_hash() == short.model_copy(update={"seed": 9}).config_hash()
    assert short.config_hash() != short.model_copy(update={"sir_db": 0.0}).config_hash()
    assert short.voices == ("low", "high")
    with pytest.raises(ValidationError):
        ScenarioConfig(room="office")


def test_t60_ratio():
    assert t60_ratio_db(500.0) == pytest.approx(-5.0, abs=0.05)
    assert t60_ratio_db(800.0) == pytest.approx(-2.0, abs=0.05)
    assert t60_ratio_db(0.0) == -math.inf
    assert t60_ratio_db(500.0, 1.0) == pytest.approx(t60_ratio_db(500.0))
    assert t60_ratio_db(500.0, 2.0) - t60_ratio_db(500.0) == pytest.approx(
        20 * math.log10(2.0)
    )


@pytest.mark.parametrize(
    ("preset", "count"),
    [("table1-full", 1458), ("table1-reduced", 288), ("table1-mini", 3)],
)
def test_preset_sizes(preset, count):
    grid = scenario_preset(preset, seed=1, duration=2.0)
    assert len(grid) == count
    assert all(cfg.seed == 1 and cfg.duration == 2.0 for cfg in grid)
    assert len({cfg.scenario_id for cfg in grid}) == count


def test_desk_benchmark_sweeps_azimuths():
    grid = scenario_preset("desk-benchmark")
    assert [cfg.interferer_azimuth for cfg in grid] == [
        10.0,
        30.0,
        50.0,
        70.0,
        90.0,
        110.0,
    ]


def test_unknown_preset():
    with pytest.raises(UnknownPresetError, match="table1-mini"):
        scenario_preset("table1-mni")


def test_integer_delay_shifts_samples(rng):
    signal = rng.standard_normal(256)
    shifted = delay_signal(signal, 3.0)
    np.testing.assert_allclose(shifted[3:], signal[:-3], atol=1e-12)
    np.testing.assert_allclose(delay_signal(signal, 0.0), signal, atol=1e-12)


def test_plane_wave_matches_the_steering_phase(rng, ula4):
    signal = rng.standard_normal(16000)
    doa = DoA.from_degrees(30.0)
    rendered = plane_wave(signal, ula4, doa)
    np.testing.assert_allclose(rendered[0], signal, atol=1e-12)
    frames = stft(rendered, StftConfig())
    r = sample_covariance(frames)[16]
    measured = np.angle(r[1, 0] / r[0, 0])
    delay = 0.02 * math.cos(doa.azimuth) / 343.0
    assert measured == pytest.approx(-2 * math.pi * 2000.0 * delay, abs=0.02)


def test_diffuse_field_coherence(rng):
    pair = SensorArray([[0.0, 0.0, 0.0], [0.05, 0.0, 0.0]])
    noise = diffuse_field(pair, 4 * 16000, rng)
    assert np.var(noise, axis=1) == pytest.approx([1.0, 1.0], abs=0.1)
    r = sample_covariance(stft(noise, StftConfig()))[16]
    coherence = r[0, 1].real / math.sqrt(r[0, 0].real * r[1, 1].real)
    assert coherence == pytest.approx(np.sinc(2 * 2000.0 * 0.05 / 343.0), abs=0.1)


def test_surrogates(rng):
    speech = speech_surrogate(8000, rng, voice="high")
    assert np.std(speech) == pytest.approx(1.0)
    tone = harmonic_surrogate(8000, rng, fundamental=200.0)
    assert np.std(tone) == pytest.approx(1.0)
    with pytest.raises(AliasingError):
        harmonic_surrogate(8000, rng, fundamental=600.0)
    with pytest.raises(InvalidScenarioError):
        speech_surrogate(8000, rng, voice="tenor")


def test_export_and_load(tmp_path, short):
    signals = synthesize(short.model_copy(update={"duration": 0.25}))
    directory = export_scenario(signals, tmp_path / signals.scenario_id)
    assert (directory / "manifest.json").exists()
    loaded = load_scenario(directory)
    assert loaded.config == signals.config
    assert loaded.array.n_sensors == 16
    for name in COMPONENTS:
        np.testing.assert_allclose(
            loaded.components[name], signals.components[name], atol=1e-5
        )
    assert loaded.ratios["sir_db"] == pytest.approx(short.sir_db, abs=0.1)


def test_missing_required_component(tmp_path, short):
    signals = synthesize(short.model_copy(update={"duration": 0.25}))
    directory = export_scenario(signals, tmp_path / "scene")
    (directory / "components" / "interferer.wav").unlink()
    with pytest.raises(InvalidScenarioError):
        load_scenario(directory)
    with pytest.raises(InvalidScenarioError):
        load_scenario(tmp_path / "nowhere")


def test_optional_components_default_to_silence(tmp_path, short):
    signals = synthesize(short.model_copy(update={"duration": 0.25}))
    directory = export_scenario(signals, tmp_path / "scene")
    (directory / "components" / "ring.wav").unlink()
    loaded = load_scenario(directory)
    np.testing.assert_array_equal(loaded.components["ring"], 0.0)


def test_linear_array_scene(short):
    signals = synthesize(short, ula(4, 0.05))
    assert signals.mixture.shape == (4, 16000)


def test_point_source_follows_spherical_geometry(rng):
    spacing = 3 * 343.0 / 16000.0
    pair = SensorArray([[0.0, 0.0, 0.0], [spacing, 0.0, 0.0]])
    signal = rng.standard_normal(2048)
    rendered = point_source(signal, pair, np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(rendered[0], signal, atol=1e-9)
    np.testing.assert_allclose(
        rendered[1][3:], signal[:-3] / (1.0 - spacing), atol=1e-9
    )
    with pytest.raises(InvalidScenarioError):
        point_source(signal, pair, np.zeros(3))


def test_distant_point_source_is_a_plane_wave(rng, ula4):
    signal = rng.standard_normal(4096)
    doa = DoA.from_degrees(30.0)
    np.testing.assert_allclose(
        point_source(signal, ula4, 1e4 * doa.unit_vector),
        plane_wave(signal, ula4, doa),
        atol=1e-3,
    )


def test_ring_sources_are_near_field(ura4):
    n = 4096
    near = ring_field(ura4, n, np.random.default_rng(5))
    far = ring_field(ura4, n, np.random.default_rng(5), radius=1e4)
    stream = np.random.default_rng(5)
    planar = np.zeros_like(near)
    for index, fundamental in enumerate(RING_FUNDAMENTALS):
        signal = harmonic_surrogate(n, stream, fundamental=fundamental)
        doa = DoA(math.pi / len(RING_FUNDAMENTALS) * (2 * index + 1))
        planar += plane_wave(signal, ura4, doa)
    np.testing.assert_allclose(far, planar, atol=1e-2)
    np.testing.assert_allclose(near[0], planar[0], atol=1e-9)
    assert np.max(np.abs(near - planar)) > 1e-2


def test_sweep_renders_in_grid_order(short):
    grid = [
        short.model_copy(update={"duration": 0.25, "interferer_azimuth": azimuth})
        for azimuth in (70.0, 20.0)
    ]
    scenes = list(sweep(grid))
    assert [cfg for cfg, _ in scenes] == grid
    for cfg, signals in scenes:
        assert signals.config == cfg
        np.testing.assert_array_equal(signals.mixture, synthesize(cfg).mixture)
