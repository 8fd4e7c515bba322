import numpy as np
import pytest

from domain.errors import ShapeError
from infrastructure.autodiff import finite_difference_gradient
from infrastructure.targets import (
    Gaussian,
    GaussianMixture,
    IsotropicGaussian,
    LogisticPosterior,
    crossed_mixture_new,
    logistic_posterior_score,
    ring8_new,
)


def _logistic(rng, n=6, p=3):
    features = rng.normal(size=(n, p))
    labels = np.where(rng.uniform(size=n) < 0.5, -1.0, 1.0)
    return LogisticPosterior(features, labels)


def _targets(rng):
    return [
        IsotropicGaussian(np.array([1.0, -1.0]), 2.0),
        Gaussian(np.array([0.5, 0.0]), np.array([[2.0, 0.3], [0.3, 1.0]])),
        ring8_new(4.0, 1.0),
        crossed_mixture_new(0.8),
        _logistic(rng),
    ]


def test_isotropic_log_density_is_zero_at_mean():
    target = IsotropicGaussian(np.zeros(3))
    assert target.log_density_unnorm(np.zeros(3)) == 0.0
    np.testing.assert_allclose(target.score(np.array([1.0, 2.0, 3.0])), [-1.0, -2.0, -3.0])


def test_scores_match_finite_differences(rng):
    for target in _targets(rng):
        x = 0.5 * rng.normal(size=target.dim)
        numeric = finite_difference_gradient(lambda v: float(target.log_density_unnorm(v)), x)
        np.testing.assert_allclose(target.score(x), numeric, rtol=1e-5, atol=1e-6)


def test_score_jacobians_are_symmetric_and_match_finite_differences(rng):
    for target in _targets(rng):
        x = 0.5 * rng.normal(size=target.dim)
        jacobian = target.score_jacobian(x)
        np.testing.assert_allclose(jacobian, jacobian.T, atol=1e-12)
        for i in range(target.dim):
            numeric = finite_difference_gradient(lambda v: float(target.score(v)[i]), x)
            np.testing.assert_allclose(jacobian[i], numeric, rtol=1e-4, atol=1e-5)


def test_batched_and_single_evaluations_agree(rng):
    target = ring8_new()
    X = rng.normal(scale=10.0, size=(5, 2))
    batch = target.score(X)
    for row, expected in zip(X, batch):
        np.testing.assert_allclose(target.score(row), expected)
    assert target.log_density_unnorm(X).shape == (5,)
    assert target.score_jacobian(X).shape == (5, 2, 2)


def test_wrong_dimension_is_rejected():
    with pytest.raises(ShapeError):
        IsotropicGaussian(np.zeros(2)).score(np.zeros(3))


def test_ring_moments():
    target = ring8_new(15.0, 1.0)
    np.testing.assert_allclose(target.mean(), [0.0, 0.0], atol=1e-12)
    np.testing.assert_allclose(target.marginal_sd() ** 2, [113.5, 113.5])
    assert len(target.modes) == 8
    np.testing.assert_allclose(target.modes[0], [15.0, 0.0])


def test_ring_samples_match_moments(rng):
    draws = ring8_new().sample(40000, rng)
    np.testing.assert_allclose(np.mean(draws, axis=0), [0.0, 0.0], atol=0.3)
    np.testing.assert_allclose(np.var(draws, axis=0), [113.5, 113.5], rtol=0.05)


def test_mixture_stays_finite_far_from_all_components():
    target = ring8_new()
    far = np.array([1e3, -1e3])
    assert np.isfinite(target.log_density_unnorm(far))
    assert np.all(np.isfinite(target.score(far)))


def test_crossed_mixture_landmarks_lie_on_ridges():
    target = crossed_mixture_new(0.8, 2.0)
    first, second = target.modes
    assert np.linalg.norm(first) == pytest.approx(2.0)
    assert first[0] == pytest.approx(first[1])
    assert second[0] == pytest.approx(-second[1])
    np.testing.assert_allclose(target.marginal_sd(), [1.0, 1.0])


def test_mixture_rejects_bad_weights():
    components = [IsotropicGaussian(np.zeros(1)), IsotropicGaussian(np.ones(1))]
    with pytest.raises(ValueError):
        GaussianMixture([0.7, 0.7], components)
    with pytest.raises(ShapeError):
        GaussianMixture([1.0], components)


def test_logistic_minibatch_score_is_unbiased(rng):
    target = _logistic(rng, n=6, p=2)
    x = rng.normal(size=target.dim)
    pairs = [np.array([i, j]) for i in range(6) for j in range(i + 1, 6)]
    average = np.mean([logistic_posterior_score(target, x, pair) for pair in pairs], axis=0)
    np.testing.assert_allclose(average, target.score(x), rtol=1e-10, atol=1e-10)


def test_logistic_full_batch_view_equals_target(rng):
    target = _logistic(rng)
    x = rng.normal(size=target.dim)
    np.testing.assert_allclose(target.minibatch(np.arange(6)).score(x), target.score(x))


def test_logistic_rejects_unmapped_labels():
    with pytest.raises(ValueError):
        LogisticPosterior(np.ones((2, 1)), np.array([0.0, 1.0]))
