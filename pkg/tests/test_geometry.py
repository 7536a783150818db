import math

import numpy as np
import pytest

from ncm_doa.exceptions import (
    ConfigLoadError,
    DegenerateGeometryError,
    InvalidArrayError,
    InvalidDoaError,
    UnknownPresetError,
)
from ncm_doa.geometry import (
    CovarianceKind,
    DoA,
    SensorArray,
    angular_distance,
    directional_pseudocov,
    isotropic_pseudocov,
    load_array,
    relative_geometry,
    steering_grid,
    steering_vector,
    ula,
    white_pseudocov,
    wrap_angle,
)


def test_pair_geometry_of_two_sensors():
    array = SensorArray([[0.0, 0.0, 0.0], [0.02, 0.0, 0.0]])
    geometry = relative_geometry(array)
    assert geometry.distance[0, 1] == pytest.approx(0.02)
    assert geometry.azimuth[0, 1] == pytest.approx(0.0)
    assert geometry.elevation[0, 1] == pytest.approx(0.0)
    assert geometry.distance[1, 0] == pytest.approx(0.02)
    assert geometry.azimuth[1, 0] == pytest.approx(math.pi)
    assert geometry.elevation[1, 0] == pytest.approx(0.0)


def test_pair_geometry_diagonal_is_zero(ura4):
    geometry = relative_geometry(ura4)
    np.testing.assert_array_equal(np.diag(geometry.distance), 0.0)
    i, j = geometry.upper_pairs()
    assert len(i) == 16 * 15 // 2
    assert np.all(i < j)


def test_coincident_sensors_are_rejected():
    array = SensorArray([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.02, 0.0, 0.0]])
    with pytest.raises(DegenerateGeometryError):
        relative_geometry(array)
    geometry = relative_geometry(array, allow_coincident=True)
    assert geometry.distance[0, 1] == 0.0


@pytest.mark.parametrize("azimuth", [0.0, 30.0, 110.0, -170.0])
def test_steering_vector_is_unit_modulus_with_unit_reference(ura4, azimuth):
    sv = steering_vector(ura4, DoA.from_degrees(azimuth))
    assert sv.values.shape == (65, 16)
    np.testing.assert_allclose(np.abs(sv.values), 1.0, atol=1e-14)
    np.testing.assert_array_equal(sv.values[:, 0], 1.0)


def test_steering_vector_broadside_to_pair_is_one(ula4):
    sv = steering_vector(ula4, DoA.from_degrees(90.0))
    np.testing.assert_allclose(sv.values, 1.0, atol=1e-12)


def test_steering_vector_endfire_phase(ula4):
    # Bin 32 of a 128-point frame at 16 kHz sits at 4 kHz.
    sv = steering_vector(ula4, DoA.from_degrees(0.0), bins=[32])
    expected = np.exp(-2j * math.pi * 4000.0 * 0.02 / 343.0)
    assert ula4.bin_frequency(32) == pytest.approx(4000.0)
    assert sv.values[0, 1] == pytest.approx(expected, abs=1e-12)


def test_steering_grid_matches_steering_vector(ura4):
    azimuths = np.radians([10.0, 70.0])
    grid = steering_grid(ura4, azimuths, bins=[5, 40])
    for g, azimuth in enumerate(azimuths):
        sv = steering_vector(ura4, DoA(azimuth), bins=[5, 40])
        np.testing.assert_allclose(grid[:, g, :], sv.values, atol=1e-12)


def test_isotropic_pseudocov_diagonal_and_dc(ura4):
    gamma = isotropic_pseudocov(ura4).matrices
    np.testing.assert_allclose(np.diagonal(gamma, axis1=1, axis2=2), 1.0)
    np.testing.assert_allclose(gamma[0], np.ones((16, 16)))


def test_isotropic_pseudocov_matches_plane_wave_average(rng):
    array = SensorArray([[0.0, 0.0, 0.0], [0.02, 0.0, 0.0]])
    gamma = isotropic_pseudocov(array, bins=[32]).matrices[0]
    units = rng.standard_normal((100_000, 3))
    units /= np.linalg.norm(units, axis=1, keepdims=True)
    delays = units @ array.offsets.T / array.wave_speed
    b = np.exp(-2j * math.pi * 4000.0 * delays)
    average = np.mean(b[:, 0] * b[:, 1].conj())
    assert abs(average - gamma[0, 1]) < 1e-2


def test_isotropic_pseudocov_coincident_sensors_are_coherent():
    array = SensorArray([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    gamma = isotropic_pseudocov(array).matrices
    np.testing.assert_allclose(gamma, 1.0)


def test_directional_pseudocov_trace_and_entries(ula4):
    doa = DoA.from_degrees(30.0)
    sv = steering_vector(ula4, doa)
    r = directional_pseudocov(sv)
    assert r.kind is CovarianceKind.INTERFERER
    np.testing.assert_allclose(np.trace(r.matrices, axis1=1, axis2=2), 4.0)

    k = 20
    projection = ula4.offsets @ doa.unit_vector
    f = ula4.bin_frequency(k)
    expected = np.exp(
        -2j * math.pi * f * (projection[:, None] - projection[None, :]) / 343.0
    )
    np.testing.assert_allclose(r.matrices[k], expected, atol=1e-12)


def test_white_pseudocov_is_identity(ura4):
    v = white_pseudocov(ura4, bins=[3, 4])
    np.testing.assert_array_equal(v.matrices, np.broadcast_to(np.eye(16), (2, 16, 16)))


def test_covariance_kind_codes():
    assert CovarianceKind.from_code("p") is CovarianceKind.INTERFERER
    assert CovarianceKind.from_code("Isotropic") is CovarianceKind.ISOTROPIC
    assert CovarianceKind.from_code("unknown") is None
    assert [kind.index for kind in CovarianceKind] == [0, 1, 2, 3]


def test_doa_wraps_and_validates():
    assert DoA.from_degrees(350.0).azimuth_deg == pytest.approx(-10.0)
    assert DoA.from_degrees(-180.0).azimuth == pytest.approx(math.pi)
    with pytest.raises(InvalidDoaError):
        DoA(0.0, 2.0)
    with pytest.raises(InvalidDoaError):
        DoA(float("nan"))


def test_angle_helpers():
    assert wrap_angle(1.5 * math.pi) == pytest.approx(-0.5 * math.pi)
    assert angular_distance(math.radians(179.0), math.radians(-179.0)) == pytest.approx(
        math.radians(2.0)
    )


def test_array_validation():
    with pytest.raises(InvalidArrayError):
        SensorArray([[0.0, 0.0, 0.0]])
    with pytest.raises(InvalidArrayError):
        SensorArray([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], reference=2)
    with pytest.raises(InvalidArrayError):
        SensorArray([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], bins=1)


def test_array_shape_properties(ura4, ula4):
    assert ura4.n_sensors == 16
    assert ura4.n_fft == 128
    assert ura4.is_planar and not ura4.is_collinear
    assert ula4.is_collinear
    np.testing.assert_allclose(ula4.axis, [1.0, 0.0, 0.0])
    with pytest.raises(InvalidArrayError):
        _ = ura4.axis


def test_load_array_preset_and_document(tmp_path):
    assert load_array("ura-8x2").n_sensors == 16
    path = tmp_path / "pair.json"
    path.write_text('{"sensors": [[0, 0, 0], [0.05, 0, 0]], "bins": 33}')
    array = load_array(path)
    assert array.n_sensors == 2
    assert array.bins == 33
    assert array.name == "pair"


def test_load_array_errors(tmp_path):
    with pytest.raises(UnknownPresetError):
        load_array("ura-4x5")
    path = tmp_path / "bad.json"
    path.write_text('{"sensors": [[0, 0, 0]]}')
    with pytest.raises(ConfigLoadError):
        load_array(path)
    with pytest.raises(ConfigLoadError):
        load_array(tmp_path / "missing.json")


def test_document_round_trip(ura4):
    from ncm_doa.geometry import ArrayDocument

    restored = ArrayDocument.model_validate(ura4.to_document()).to_array()
    np.testing.assert_array_equal(restored.positions, ura4.positions)
    assert restored.bins == ura4.bins


def test_ula_positions():
    array = ula(3, 0.05)
    np.testing.assert_allclose(array.positions[:, 0], [0.0, 0.05, 0.1])
