import numpy as np
import pytest

from ncm_doa.beamforming import (
    BeamformerMethod,
    BeamformerWeights,
    ConstraintSet,
    delay_and_sum,
    lcmp,
    lcmv,
    mvdr,
    steered_power,
)
from ncm_doa.exceptions import (
    BeamformerError,
    ConstraintCollisionError,
    DimensionMismatchError,
)
from ncm_doa.geometry import DoA, SteeringVector, steering_vector

BINS = np.arange(8, 41, 8)


def _hpd(rng, k, m):
    a = rng.standard_normal((k, m, m)) + 1j * rng.standard_normal((k, m, m))
    return np.einsum("kmi,kni->kmn", a, a.conj()) + 0.1 * np.eye(m)


@pytest.fixture
def constraints(ura4, broadside):
    return ConstraintSet.from_doas(ura4, broadside, DoA.from_degrees(60.0), BINS)


def test_lcmv_meets_the_constraints(rng, constraints):
    weights = lcmv(_hpd(rng, len(BINS), 16), constraints)
    np.testing.assert_allclose(weights.response(constraints.desired), 1.0, atol=1e-10)
    interferer = weights.response(constraints.interferer)
    np.testing.assert_allclose(interferer, 0.0, atol=1e-10)
    assert weights.method is BeamformerMethod.LCMV
    assert weights.collided_bins == ()


def test_lcmv_minimizes_noise_power(rng, constraints):
    ncm = _hpd(rng, len(BINS), 16)
    weights = lcmv(ncm, constraints)
    power = weights.output_power(ncm)
    c = constraints.matrices
    for _ in range(5):
        # Perturbations orthogonal to both constraints keep the responses.
        z = rng.standard_normal((len(BINS), 16)) + 1j * rng.standard_normal(
            (len(BINS), 16)
        )
        q, _ = np.linalg.qr(c)
        z = z - np.einsum("kmi,kni,kn->km", q, q.conj(), z)
        other = BeamformerWeights(
            values=weights.values + 0.1 * z, method=weights.method, bins=BINS
        )
        assert np.all(other.output_power(ncm) >= power - 1e-9)


def test_white_noise_with_orthogonal_constraints():
    d = np.ones((1, 4), dtype=np.complex128)
    b = np.array([[1.0, 1j, -1.0, -1j]])
    bins = np.array([5])
    cs = ConstraintSet(
        desired=SteeringVector(doa=DoA(0.0), values=d, bins=bins),
        interferer=SteeringVector(doa=DoA(1.0), values=b, bins=bins),
    )
    weights = lcmv(np.eye(4)[None], cs)
    np.testing.assert_allclose(weights.values, d / 4, atol=1e-12)


def test_mvdr_on_identity_is_delay_and_sum(ura4, broadside):
    d = steering_vector(ura4, broadside, BINS)
    identity = np.broadcast_to(np.eye(16), (len(BINS), 16, 16))
    weights = mvdr(identity, d)
    np.testing.assert_allclose(weights.values, d.values / 16, atol=1e-12)
    np.testing.assert_allclose(weights.values, delay_and_sum(d).values, atol=1e-12)


def test_mvdr_forms_are_distortionless(rng, ura4, broadside):
    d = steering_vector(ura4, DoA.from_degrees(20.0), BINS)
    ncm = _hpd(rng, len(BINS), 16)
    standard = mvdr(ncm, d)
    printed = mvdr(ncm, d, form="printed")
    np.testing.assert_allclose(standard.response(d), 1.0, atol=1e-10)
    np.testing.assert_allclose(printed.response(d), 1.0, atol=1e-10)
    assert np.all(standard.output_power(ncm) <= printed.output_power(ncm) + 1e-9)
    with pytest.raises(BeamformerError):
        mvdr(ncm, d, form="inverse")


def test_lcmp_equals_lcmv_when_sources_lie_in_the_constraints(rng, constraints):
    ncm = _hpd(rng, len(BINS), 16)
    d = constraints.desired.values
    b = constraints.interferer.values
    ry = (
        ncm
        + 2.0 * np.einsum("km,kn->kmn", d, d.conj())
        + 3.0 * np.einsum("km,kn->kmn", b, b.conj())
    )
    np.testing.assert_allclose(
        lcmp(ry, constraints).values, lcmv(ncm, constraints).values, atol=1e-8
    )


def test_collision_policy(rng, ura4, broadside):
    cs = ConstraintSet.from_doas(ura4, broadside, broadside, BINS)
    assert np.all(cs.collided)
    ncm = _hpd(rng, len(BINS), 16)
    with pytest.raises(ConstraintCollisionError):
        lcmv(ncm, cs)
    weights = lcmv(ncm, cs, on_collision="distortionless")
    assert weights.collided_bins == tuple(BINS)
    np.testing.assert_allclose(
        weights.values, mvdr(ncm, cs.desired).values, atol=1e-10
    )


def test_dc_bin_always_collides(ura4, broadside):
    cs = ConstraintSet.from_doas(ura4, broadside, DoA.from_degrees(90.0), [0, 16])
    np.testing.assert_array_equal(cs.collided, [True, False])


def test_lcmp_loads_singular_covariance(constraints):
    ry = np.zeros((len(BINS), 16, 16))
    weights = lcmp(ry, constraints, epsilon=1e-3)
    assert weights.loaded == tuple(BINS)
    np.testing.assert_allclose(weights.response(constraints.desired), 1.0, atol=1e-8)


def test_lcmv_rejects_indefinite_and_mismatched_input(constraints):
    singular = np.zeros((len(BINS), 16, 16))
    with pytest.raises(BeamformerError):
        lcmv(singular, constraints)
    with pytest.raises(DimensionMismatchError):
        lcmv(np.zeros((2, 16, 16)), constraints)


def test_steered_power_peaks_at_the_source(ura4):
    source = steering_vector(ura4, DoA.from_degrees(40.0), [32]).values
    ry = np.einsum("km,kn->kmn", source, source.conj())
    azimuths = np.radians(np.arange(-180.0, 180.0, 1.0))
    power = steered_power(ry, ura4, azimuths, [32])
    assert np.degrees(azimuths[np.argmax(power[0])]) == pytest.approx(40.0)
    assert power[0].max() == pytest.approx(1.0)


def test_weights_survive_export(tmp_path, rng, constraints):
    weights = lcmv(_hpd(rng, len(BINS), 16), constraints)
    weights.export(tmp_path / "weights" / "lcmv")
    loaded = BeamformerWeights.load(tmp_path / "weights" / "lcmv")
    np.testing.assert_array_equal(loaded.values, weights.values)
    np.testing.assert_array_equal(loaded.bins, BINS)
    assert loaded.method is BeamformerMethod.LCMV
    assert loaded.constraints is None
