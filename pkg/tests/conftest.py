import numpy as np
import pytest

from ncm_doa.estimation import BinCovarianceSet, model_covariance
from ncm_doa.geometry import DoA, array_preset, ula


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def ura4():
    return array_preset("ura-4x4")


@pytest.fixture
def ula4():
    return ula(4, 0.02)


@pytest.fixture
def exact_set():
    """Build a covariance set whose observed matrices follow the model exactly."""

    def build(array, desired, interferer, sigma, *, epsilon=1e-4, bins=None):
        bins = np.arange(array.bins) if bins is None else np.asarray(bins)
        sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (len(bins), 4))
        empty = np.zeros((len(bins), array.n_sensors, array.n_sensors))
        scaffold = BinCovarianceSet.from_observed(
            empty, array, desired, epsilon=epsilon, bins=bins, interferer_doa=interferer
        )
        observed = model_covariance(sigma, scaffold)
        return BinCovarianceSet.from_observed(
            observed, array, desired, epsilon=epsilon, bins=bins
        )

    return build


@pytest.fixture
def broadside():
    return DoA.from_degrees(0.0)
