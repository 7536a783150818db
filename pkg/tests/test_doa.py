import math

import numpy as np
import pytest

from ncm_doa.estimation import (
    BinCovarianceSet,
    DescentConfig,
    EstimatorConfig,
    GradientForm,
    assemble_ncm,
    broadband_cost,
    descend_doa,
    doa_gradient,
    gradient_scale,
    joint_estimate,
    reduce_to_azimuth,
    write_trace,
)
from ncm_doa.exceptions import EstimationError, InvalidArrayError
from ncm_doa.geometry import DoA, SensorArray, angular_distance, array_preset
from ncm_doa.storage import read_json_lines

SIGMA = np.array([1.0, 0.5, 0.2, 0.1])
BINS = np.arange(4, 41, 4)


@pytest.fixture
def truth():
    return DoA.from_degrees(60.0)


@pytest.fixture
def comps(exact_set, ura4, broadside, truth):
    return exact_set(ura4, broadside, truth, SIGMA, bins=BINS)


def _sigma(comps):
    return np.broadcast_to(SIGMA, (comps.n_bins, 4))


def test_cost_vanishes_at_the_truth(comps, truth):
    reference = float(np.sum(np.abs(comps.observed) ** 2))
    assert broadband_cost(_sigma(comps), truth, comps) <= 1e-20 * reference
    away = broadband_cost(_sigma(comps), DoA.from_degrees(45.0), comps)
    assert away > 0


def test_gradient_matches_finite_differences(comps):
    sigma = _sigma(comps)
    doa = DoA.from_degrees(45.0, 10.0)
    gradient = doa_gradient(sigma, doa, comps)
    h = 1e-6
    d_theta = (
        broadband_cost(sigma, doa.moved(h), comps)
        - broadband_cost(sigma, doa.moved(-h), comps)
    ) / (2 * h)
    d_phi = (
        broadband_cost(sigma, doa.moved(0.0, h), comps)
        - broadband_cost(sigma, doa.moved(0.0, -h), comps)
    ) / (2 * h)
    atol = 1e-6 * np.max(np.abs(gradient))
    np.testing.assert_allclose(gradient, [d_theta, d_phi], rtol=1e-5, atol=atol)


def test_gradient_vanishes_at_the_truth(comps, truth):
    gradient = doa_gradient(_sigma(comps), truth, comps)
    assert np.linalg.norm(gradient) < 1e-8


def test_unscaled_gradient_drops_the_prefactor(ura4, comps):
    doa = DoA.from_degrees(30.0)
    scaled = doa_gradient(_sigma(comps), doa, comps)
    raw = doa_gradient(_sigma(comps), doa, comps, scaled=False)
    expected = 4 * math.pi * 16000 / (128 * 343.0)
    assert gradient_scale(ura4) == pytest.approx(expected)
    np.testing.assert_allclose(scaled, expected * raw)


def test_reduced_forms_agree_in_the_horizontal_plane(comps):
    doa = DoA.from_degrees(30.0)
    full = doa_gradient(_sigma(comps), doa, comps, GradientForm.FULL)
    general = doa_gradient(_sigma(comps), doa, comps, "general")
    planar = doa_gradient(_sigma(comps), doa, comps, GradientForm.PLANAR)
    assert general[0] == pytest.approx(full[0])
    np.testing.assert_allclose(planar, general)


def test_linear_form_keeps_the_sign(exact_set, ula4, broadside):
    comps = exact_set(ula4, broadside, DoA.from_degrees(70.0), SIGMA, bins=BINS)
    for start in (40.0, 100.0):
        doa = DoA.from_degrees(start)
        full = doa_gradient(_sigma(comps), doa, comps)
        linear = doa_gradient(_sigma(comps), doa, comps, GradientForm.LINEAR)
        assert np.sign(linear[0]) == np.sign(full[0])
        assert linear[1] == 0.0


def test_linear_form_needs_a_collinear_array(comps):
    with pytest.raises(InvalidArrayError):
        doa_gradient(_sigma(comps), DoA(0.5), comps, GradientForm.LINEAR)
    with pytest.raises(EstimationError):
        doa_gradient(_sigma(comps), DoA(0.5), comps, "diagonal")


def test_reduce_to_azimuth():
    assert reduce_to_azimuth(math.pi / 3, 0.0) == pytest.approx(math.pi / 3)
    assert reduce_to_azimuth(-math.pi / 3, 0.0) == pytest.approx(math.pi / 3)
    assert reduce_to_azimuth(0.0, math.pi / 2) == pytest.approx(math.pi / 2)
    assert reduce_to_azimuth(math.pi / 3, math.pi / 3) == pytest.approx(
        math.acos(0.25)
    )


def test_descent_config_validation():
    with pytest.raises(EstimationError):
        DescentConfig(step=0.0)
    with pytest.raises(EstimationError):
        DescentConfig(contraction=1.0)
    with pytest.raises(EstimationError):
        DescentConfig(max_iterations=0)
    with pytest.raises(EstimationError):
        EstimatorConfig(max_outer=0)


def test_start_points(broadside):
    starts = DescentConfig(starts=4).start_points(broadside)
    assert [round(s.azimuth_deg, 6) for s in starts] == [45.0, 135.0, -135.0, -45.0]
    initial = DoA.from_degrees(10.0)
    offsets = DescentConfig(initial=initial, offsets=(0.0, 0.1)).start_points(broadside)
    assert offsets[0] == initial
    assert offsets[1].azimuth == pytest.approx(initial.azimuth + 0.1)


def test_descent_moves_toward_the_truth(comps, truth):
    start = DoA.from_degrees(45.0)
    result = descend_doa(_sigma(comps), start, DescentConfig(), comps)
    assert result.cost <= broadband_cost(_sigma(comps), start, comps)
    assert math.degrees(angular_distance(result.doa.azimuth, truth.azimuth)) < 0.5
    assert result.start == start
    assert result.iterations > 0


def test_descent_stays_outside_the_exclusion_zone(comps, broadside):
    cfg = DescentConfig(max_iterations=3)
    result = descend_doa(_sigma(comps), DoA.from_degrees(2.0), cfg, comps)
    distance = angular_distance(result.doa.azimuth, broadside.azimuth)
    assert math.degrees(distance) >= 5.0 - 1e-9


def test_joint_estimate_recovers_exact_model(comps, truth):
    estimate = joint_estimate(comps)
    assert math.degrees(angular_distance(estimate.doa.azimuth, truth.azimuth)) < 0.5
    np.testing.assert_allclose(estimate.variances.values, _sigma(comps), rtol=1e-2)
    np.testing.assert_array_equal(estimate.band, BINS)
    assert not estimate.low_confidence
    expected = assemble_ncm(SIGMA, comps.with_interferer(truth))
    scale = np.max(np.abs(expected.matrices))
    np.testing.assert_allclose(
        estimate.ncm.matrices, expected.matrices, atol=1e-2 * scale
    )


def test_out_of_band_bins_keep_white_noise(exact_set, ura4, broadside, truth):
    bins = np.arange(4, 49, 4)
    comps = exact_set(ura4, broadside, truth, SIGMA, bins=bins)
    estimate = joint_estimate(comps, EstimatorConfig(max_bin=32))
    outside = bins > 32
    np.testing.assert_array_equal(estimate.band, bins[~outside])
    np.testing.assert_array_equal(estimate.variances.values[outside, :3], 0.0)
    np.testing.assert_allclose(estimate.variances.white[outside], SIGMA.sum())


def test_empty_band_is_rejected(comps):
    with pytest.raises(EstimationError):
        joint_estimate(comps, EstimatorConfig(min_bin=100))


def test_silent_interferer_is_low_confidence(exact_set, ura4, broadside, truth):
    comps = exact_set(ura4, broadside, truth, [1.0, 0.0, 0.2, 0.1], bins=BINS)
    estimate = joint_estimate(comps, EstimatorConfig(descent=DescentConfig(starts=2)))
    assert estimate.low_confidence


def test_trace_is_written_per_iteration(tmp_path, comps):
    cfg = EstimatorConfig(descent=DescentConfig(starts=2), max_outer=3)
    estimate = joint_estimate(comps, cfg)
    path = write_trace(tmp_path / "estimates.jsonl", estimate)
    records = read_json_lines(path)
    assert len(records) == len(estimate.trace)
    assert {record["start"] for record in records} == {0, 1}
    assert records[0]["iteration"] == 0


def _random_observed(rng, n_bins, n_sensors):
    shape = (n_bins, n_sensors, 2 * n_sensors)
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return x @ x.conj().transpose(0, 2, 1) / (2 * n_sensors)


def _perturbed(comps, rng, level):
    noise = _random_observed(rng, comps.n_bins, comps.n_sensors)
    return BinCovarianceSet.from_observed(
        comps.observed + level * noise,
        comps.array,
        comps.desired_doa,
        epsilon=comps.epsilon,
        bins=comps.bins,
    )


@pytest.mark.parametrize("geometry", ["ura-4x4", "ura-8x2", "random"])
def test_gradient_matches_finite_differences_on_random_instances(
    rng, broadside, geometry
):
    h = 1e-6
    for _ in range(70):
        if geometry == "random":
            array = SensorArray(rng.uniform(-0.05, 0.05, (6, 3)))
        else:
            array = array_preset(geometry)
        bins = np.sort(rng.choice(np.arange(1, array.bins), 6, replace=False))
        observed = _random_observed(rng, len(bins), array.n_sensors)
        comps = BinCovarianceSet.from_observed(observed, array, broadside, bins=bins)
        sigma = rng.uniform(0.0, 2.0, (len(bins), 4))
        elevation = rng.choice([-1.0, 1.0]) * rng.uniform(2.0, 88.0)
        doa = DoA.from_degrees(rng.uniform(-180.0, 180.0), elevation)

        gradient = doa_gradient(sigma, doa, comps)
        numeric = np.array(
            [
                broadband_cost(sigma, doa.moved(h), comps)
                - broadband_cost(sigma, doa.moved(-h), comps),
                broadband_cost(sigma, doa.moved(0.0, h), comps)
                - broadband_cost(sigma, doa.moved(0.0, -h), comps),
            ]
        ) / (2 * h)
        cost = broadband_cost(sigma, doa, comps)
        error = np.linalg.norm(gradient - numeric)
        assert error <= 1e-4 * np.linalg.norm(gradient) + 1e-8 * cost


def test_trace_costs_never_increase(comps, rng):
    noisy = _perturbed(comps, rng, 0.05)
    estimate = joint_estimate(noisy, EstimatorConfig(descent=DescentConfig(starts=3)))
    scale = float(np.sum(np.abs(noisy.observed) ** 2))
    assert len(estimate.trace) > 3
    for start in range(3):
        costs = [r["cost"] for r in estimate.trace if r["start"] == start]
        assert np.all(np.diff(costs) <= 1e-12 * scale)


def test_estimate_is_a_fixed_point(comps, rng):
    noisy = _perturbed(comps, rng, 0.05)
    first = joint_estimate(noisy, EstimatorConfig(max_outer=300))
    assert first.converged
    again = joint_estimate(
        noisy,
        EstimatorConfig(descent=DescentConfig(initial=first.doa), max_outer=300),
    )
    scale = float(np.sum(np.abs(noisy.observed) ** 2))
    assert abs(again.cost - first.cost) < 1e-10 * scale
    assert math.degrees(angular_distance(again.doa.azimuth, first.doa.azimuth)) < 1e-3


@pytest.mark.slow
def test_joint_estimate_recovers_random_models(exact_set, ura4, broadside):
    rng = np.random.default_rng(4242)
    for _ in range(50):
        sigma = rng.uniform([0.5, 0.3, 0.05, 0.01], [2.0, 2.0, 0.5, 0.2])
        truth = DoA.from_degrees(rng.uniform(30.0, 150.0))
        comps = exact_set(ura4, broadside, truth, sigma, bins=BINS)
        offset = rng.choice([-1.0, 1.0]) * rng.uniform(10.0, 15.0)
        descent = DescentConfig(
            initial=truth.moved(math.radians(offset)), tolerance=1e-10
        )
        estimate = joint_estimate(
            comps, EstimatorConfig(descent=descent, max_outer=400)
        )
        error = math.degrees(angular_distance(estimate.doa.azimuth, truth.azimuth))
        assert error < 0.1
        np.testing.assert_allclose(
            estimate.variances.values,
            np.broadcast_to(sigma, (comps.n_bins, 4)),
            rtol=1e-6,
        )
