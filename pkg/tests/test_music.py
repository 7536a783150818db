import csv
import math

import numpy as np
import pytest

from ncm_doa.beamforming import (
    MusicEstimator,
    azimuth_grid,
    circular_peaks,
    music_spectrum,
    noise_subspace,
    phasor_average,
    select_interferer,
    write_spectrum_csv,
)
from ncm_doa.exceptions import NoNoiseSubspaceError, NoValidBinsError
from ncm_doa.geometry import DoA, steering_vector

BINS = [16, 24, 32]


@pytest.fixture
def two_sources(ura4, broadside):
    d = steering_vector(ura4, broadside, BINS).values
    b = steering_vector(ura4, DoA.from_degrees(40.0), BINS).values
    return (
        np.einsum("km,kn->kmn", d, d.conj())
        + 2.0 * np.einsum("km,kn->kmn", b, b.conj())
        + 0.01 * np.eye(16)
    )


def test_azimuth_grid_covers_the_circle():
    grid = azimuth_grid(math.radians(1.0))
    assert len(grid) == 360
    assert grid[-1] == pytest.approx(math.pi)
    assert grid[0] == pytest.approx(-math.pi + math.radians(1.0))


def test_estimator_finds_the_interferer(ura4, broadside, two_sources):
    result = MusicEstimator(ura4).estimate(two_sources, broadside, BINS)
    assert math.degrees(result.msc.azimuth) == pytest.approx(40.0, abs=1e-9)
    assert math.degrees(result.wmsc.azimuth) == pytest.approx(40.0, abs=1e-9)
    assert all(selection.valid for selection in result.selections)
    np.testing.assert_array_equal(result.spectrum.noise_dimensions, [14, 14, 14])
    assert result.wmsc.method == "wMSC"
    assert result.msc.doa.azimuth == pytest.approx(math.radians(40.0))


def test_identity_gives_a_flat_spectrum(ura4):
    spectrum = music_spectrum(np.eye(16), ura4, bins=[32])
    np.testing.assert_allclose(spectrum.values, 1.0 / 16)
    assert spectrum.noise_dimensions[0] == 16
    np.testing.assert_allclose(spectrum.row(32), 1.0 / 16)


def test_full_source_count_leaves_no_noise_subspace(ura4):
    with pytest.raises(NoNoiseSubspaceError):
        noise_subspace(np.eye(16), 16)
    with pytest.raises(NoNoiseSubspaceError):
        music_spectrum(np.eye(16), ura4, sources=16)


def test_noise_subspace_is_orthogonal_to_the_sources(ura4, two_sources):
    basis = noise_subspace(two_sources[2], 2)
    assert basis.shape == (16, 14)
    d = steering_vector(ura4, DoA.from_degrees(40.0), [32]).values[0]
    assert np.linalg.norm(basis.conj().T @ d) < 1e-8


def test_low_bins_are_not_averaged(ura4, broadside, two_sources):
    ry = np.concatenate([np.eye(16)[None], two_sources])
    result = MusicEstimator(ura4).estimate(ry, broadside, [0, *BINS])
    assert not result.selections[0].valid
    assert math.isnan(result.msc.per_bin[0])
    assert result.wmsc.weights[0] == 0.0


def test_circular_peaks_wrap_around():
    row = np.array([5.0, 1.0, 2.0, 1.0, 4.0])
    np.testing.assert_array_equal(np.sort(circular_peaks(row)), [0, 2])


def test_select_interferer_skips_the_desired_direction():
    azimuths = np.radians(np.arange(-179.0, 181.0, 1.0))
    row = np.ones_like(azimuths)
    row[azimuths == np.radians(2.0)] = 10.0
    row[azimuths == np.radians(-60.0)] = 3.0
    selection = select_interferer(row, azimuths, DoA(0.0), math.radians(5.0))
    assert math.degrees(selection.azimuth) == pytest.approx(-60.0)
    assert selection.weight == 3.0
    flat = select_interferer(np.ones_like(azimuths), azimuths, 0.0)
    assert not flat.valid
    assert flat.weight == 0.0


@pytest.mark.parametrize(
    ("degrees", "expected"),
    [([10.0, 20.0, 30.0], 20.0), ([179.0, -179.0], 180.0), ([-170.0, 170.0], 180.0)],
)
def test_phasor_average(degrees, expected):
    estimate = phasor_average(np.radians(degrees))
    assert math.degrees(estimate.azimuth) == pytest.approx(expected)
    assert estimate.method == "MSC"


def test_weighted_phasor_average():
    azimuths = np.radians([0.0, 90.0, np.nan])
    estimate = phasor_average(azimuths, [1.0, 0.0, 5.0])
    assert estimate.azimuth == pytest.approx(0.0)
    np.testing.assert_array_equal(estimate.weights, [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(estimate.valid, [True, True, False])


def test_phasor_average_needs_valid_bins():
    with pytest.raises(NoValidBinsError):
        phasor_average([np.nan, np.nan])
    with pytest.raises(NoValidBinsError):
        phasor_average([0.1, 0.2], [0.0, 0.0])


def test_spectrum_csv(tmp_path, ura4, two_sources):
    spectrum = music_spectrum(two_sources, ura4, bins=BINS)
    path = write_spectrum_csv(tmp_path / "music.csv", spectrum)
    with open(path, newline="", encoding="utf-8") as fp:
        rows = list(csv.reader(fp))
    assert rows[0] == ["bin", "angle_deg", "value"]
    assert len(rows) == 1 + len(BINS) * 360
    assert rows[1][0] == "16"
