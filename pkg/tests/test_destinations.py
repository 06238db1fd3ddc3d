import numpy as np
import pytest
from scipy import stats

from destwalk.destinations import (
    DestinationSpec,
    sim1_destination,
    sim1_offsets,
    sim2_destination,
    uniform_direction,
)


def rng(seed=0):
    return np.random.default_rng(seed)


def test_sim1_mean_distance_is_inverse_rate():
    d = sim1_destination(np.zeros(2), 1000.0, rng(1), size=100_000)
    assert np.linalg.norm(d, axis=1).mean() == pytest.approx(0.001, rel=0.02)


def test_sim1_is_translation_invariant():
    a = sim1_destination(np.zeros(2), 1000.0, rng(2), size=100)
    b = sim1_destination(np.array([5.0, 5.0]), 1000.0, rng(2), size=100)
    np.testing.assert_allclose(b - 5.0, a, atol=1e-12)


def test_sim1_is_isotropic():
    off = sim1_offsets(2, 1000.0, rng(3), size=100_000)
    cos = off[:, 0] / np.linalg.norm(off, axis=1)
    assert abs(cos.mean()) < 0.01


def test_sim1_distance_is_exponential():
    off = sim1_offsets(2, 1000.0, rng(4), size=1_000_000)
    ks = stats.kstest(np.linalg.norm(off, axis=1), stats.expon(scale=1e-3).cdf).statistic
    assert ks < 0.005


def test_sim2_mean_squared_norm():
    d = sim2_destination(np.zeros(2), 0.001, rng(5), size=100_000)
    assert np.mean(np.sum(d**2, axis=1)) == pytest.approx(2e-6, rel=0.03)


def test_sim2_degenerate_noise():
    d = sim2_destination(np.zeros(2), 1e-12, rng(6))
    assert np.all(np.abs(d) < 1e-10)


def test_sim2_is_unbiased_around_anchor():
    d = sim2_destination(np.array([1.0, 2.0]), 0.001, rng(7), size=100_000)
    np.testing.assert_allclose(d.mean(axis=0), [1.0, 2.0], atol=1e-4)


def test_sim2_variance():
    d = sim2_destination(np.zeros(2), 0.001, rng(8), size=1_000_000)
    np.testing.assert_allclose(d.var(axis=0), 1e-6, rtol=0.03)


def test_uniform_direction_in_one_dimension():
    u = uniform_direction(1, rng(9), size=10_000)
    assert set(np.unique(u)) == {-1.0, 1.0}
    assert abs(np.mean(u == 1.0) - 0.5) < 0.02


@pytest.mark.parametrize("n", [1, 2, 3, 7])
def test_uniform_direction_has_unit_norm(n):
    u = uniform_direction(n, rng(n), size=1000)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-12)


def test_uniform_direction_is_centred_in_3d():
    u = uniform_direction(3, rng(10), size=100_000)
    assert np.all(np.abs(u.mean(axis=0)) < 0.01)


def test_draws_are_finite():
    for spec in (DestinationSpec("sim1"), DestinationSpec("sim2", anchor=(0.5, -0.5))):
        assert np.all(np.isfinite(spec.draw(2, 10_000, rng(11))))


def test_destination_spec_validation():
    with pytest.raises(ValueError):
        DestinationSpec("sim3")
    with pytest.raises(ValueError):
        DestinationSpec(lam=0.0)
    with pytest.raises(ValueError):
        DestinationSpec(sigma=-1.0)
    with pytest.raises(ValueError):
        DestinationSpec("sim2", anchor=(1.0,)).anchor_vector(2)
