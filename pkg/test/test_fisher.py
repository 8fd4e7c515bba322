import numpy as np
import pytest

from application.use_cases import fit_discriminator, train_fisher_ns
from domain.errors import ShapeError
from infrastructure.autodiff import finite_difference_gradient
from infrastructure.fisher import (
    FisherConfig,
    fisher_gradients,
    fisher_loss,
    optimal_discriminator_residual,
    stein_operator_mean,
)
from infrastructure.networks import NOISE_KINDS, NoiseLaw, input_jacobian_trace, mlp_forward, mlp_new
from infrastructure.targets import IsotropicGaussian, crossed_mixture_new

STANDARD_1D = IsotropicGaussian(np.zeros(1))


def _constant_network(value: float):
    net = mlp_new([1, 1], "tanh", 0)
    return net.with_parameters([np.zeros((1, 1)), np.array([value])])


def test_zero_discriminator_scores_zero(rng):
    net = mlp_new([2, 6, 2], "tanh", 0)
    zero = net.with_flat_parameters(np.zeros(net.num_parameters))
    X = rng.normal(size=(10, 2))
    assert fisher_loss(crossed_mixture_new(), zero, X, 0.5) == 0.0


def test_constant_discriminator_on_symmetric_batch():
    X = np.array([[1.0], [-1.0]])
    net = _constant_network(2.0)
    assert stein_operator_mean(STANDARD_1D, net, X) == pytest.approx(0.0, abs=1e-15)
    assert fisher_loss(STANDARD_1D, net, X, 0.5) == pytest.approx(-0.5 * 4.0)


def test_stein_identity_holds_for_identity_discriminator(rng):
    net = mlp_new([1, 1], "tanh", 0).with_parameters([np.eye(1), np.zeros(1)])
    X = rng.standard_normal((10_000, 1))
    values = -X[:, 0] ** 2 + 1.0
    standard_error = values.std(ddof=1) / np.sqrt(values.size)
    assert abs(stein_operator_mean(STANDARD_1D, net, X)) <= 3.0 * standard_error


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_stein_identity_holds_for_random_tanh_discriminators(seed):
    target = IsotropicGaussian(np.zeros(2))
    net = mlp_new([2, 50, 2], "tanh", seed)
    X = np.random.default_rng([seed, 99]).standard_normal((10_000, 2))
    values = np.sum(target.score(X) * mlp_forward(net, X), axis=1) + input_jacobian_trace(net, X)
    standard_error = values.std(ddof=1) / np.sqrt(values.size)
    mean = stein_operator_mean(target, net, X)
    assert mean == pytest.approx(values.mean(), abs=1e-12)
    assert abs(mean) <= 3.0 * standard_error


def test_optimum_attains_closed_form_loss(rng):
    # p = N(0, 1), q = N(1, 1): S_q - S_p = 1, so f* = 1 / (2 lambda) = 1 at lambda = 0.5
    target = IsotropicGaussian(np.ones(1))
    X = rng.standard_normal((10_000, 1))
    loss = fisher_loss(target, _constant_network(1.0), X, 0.5)
    assert loss == pytest.approx(0.5, abs=0.05)


def test_gradients_match_finite_differences(rng):
    target = crossed_mixture_new()
    net = mlp_new([2, 6, 2], "tanh", 4)
    X = rng.normal(size=(5, 2))
    lam = 0.3
    gradients = fisher_gradients(target, net, X, lam)
    assert gradients.loss == pytest.approx(fisher_loss(target, net, X, lam), rel=1e-10)

    flat = np.concatenate([g.reshape(-1) for g in gradients.parameter_grads])
    by_params = finite_difference_gradient(
        lambda theta: fisher_loss(target, net.with_flat_parameters(theta), X, lam), net.flat_parameters()
    )
    np.testing.assert_allclose(flat, by_params, rtol=1e-4, atol=1e-7)

    by_samples = finite_difference_gradient(lambda batch: fisher_loss(target, net, batch, lam), X)
    np.testing.assert_allclose(gradients.sample_grads, by_samples, rtol=1e-4, atol=1e-7)


def test_loss_is_concave_in_output_layer(rng):
    target = crossed_mixture_new()
    first = mlp_new([2, 8, 2], "tanh", 1)
    other_head = mlp_new([2, 8, 2], "tanh", 2)
    second = first.with_parameters(list(first.parameters()[:2]) + [other_head.weights[1], rng.normal(size=2)])
    X = rng.normal(size=(20, 2))
    loss_a = fisher_loss(target, first, X, 0.5)
    loss_b = fisher_loss(target, second, X, 0.5)
    for t in rng.uniform(size=10):
        mixed = first.with_flat_parameters(t * first.flat_parameters() + (1 - t) * second.flat_parameters())
        assert fisher_loss(target, mixed, X, 0.5) >= t * loss_a + (1 - t) * loss_b - 1e-12


def test_wrong_discriminator_shape_is_rejected(rng):
    with pytest.raises(ShapeError):
        fisher_loss(crossed_mixture_new(), mlp_new([2, 4, 1], "tanh", 0), rng.normal(size=(3, 2)), 0.5)
    with pytest.raises(ValueError):
        fisher_loss(STANDARD_1D, _constant_network(1.0), np.zeros((2, 1)), 0.0)


def test_residual_is_zero_when_target_matches(rng):
    net = mlp_new([2, 4, 2], "tanh", 0)
    zero = net.with_flat_parameters(np.zeros(net.num_parameters))
    target = IsotropicGaussian(np.zeros(2))
    assert optimal_discriminator_residual(target, target, zero, rng.normal(size=(50, 2)), 0.5) == 0.0


def test_fitted_discriminator_approaches_optimum(rng):
    target_q = IsotropicGaussian(np.ones(1))
    known_p = STANDARD_1D
    discriminator = mlp_new([1, 10, 1], "tanh", 3)
    fitted, _, losses = fit_discriminator(
        target_q,
        discriminator,
        lambda n, generator: generator.standard_normal((n, 1)),
        lam=0.5,
        steps=1500,
        learning_rate=5e-3,
        batch_size=100,
        rng=rng,
    )
    assert len(losses) == 1500
    residual = optimal_discriminator_residual(target_q, known_p, fitted, rng.standard_normal((1000, 1)), 0.5)
    assert residual < 0.1


def test_zero_iterations_leave_both_networks_unchanged(rng):
    generator = mlp_new([2, 8, 2], "tanh", 0)
    discriminator = mlp_new([2, 8, 2], "tanh", 1)
    noise = NoiseLaw(NOISE_KINDS.resolve("uniform"), 1.0, 2)
    gen, disc, trace = train_fisher_ns(
        FisherConfig(iterations=0), crossed_mixture_new(), generator, discriminator, noise, rng
    )
    np.testing.assert_array_equal(gen.flat_parameters(), generator.flat_parameters())
    np.testing.assert_array_equal(disc.flat_parameters(), discriminator.flat_parameters())
    assert trace.records == []


def test_short_run_records_both_losses(rng):
    generator = mlp_new([2, 8, 2], "tanh", 0)
    discriminator = mlp_new([2, 8, 2], "tanh", 1)
    noise = NoiseLaw(NOISE_KINDS.resolve("uniform"), 1.0, 2)
    config = FisherConfig(iterations=3, discriminator_steps=2, batch_size=16)
    gen, disc, trace = train_fisher_ns(config, crossed_mixture_new(), generator, discriminator, noise, rng)
    assert trace.iterations == [1, 2, 3]
    for record in trace.records:
        assert record.discriminator_loss is not None
        assert record.discriminator_norm is not None and record.discriminator_norm >= 0.0
    assert gen.is_finite() and disc.is_finite()


def test_config_validation():
    with pytest.raises(ValueError):
        FisherConfig(lam=0.0)
    with pytest.raises(ValueError):
        FisherConfig(discriminator_steps=0)


@pytest.mark.slow
def test_training_moves_samples_to_shifted_target():
    rng = np.random.default_rng(0)
    target = IsotropicGaussian(np.full(1, 2.0))
    generator = mlp_new([1, 20, 1], "tanh", 0)
    discriminator = mlp_new([1, 20, 1], "tanh", 1)
    noise = NoiseLaw(NOISE_KINDS.resolve("gaussian"), 1.0, 1)
    config = FisherConfig(iterations=2000, learning_rate=5e-3, discriminator_learning_rate=5e-3)
    gen, _, _ = train_fisher_ns(config, target, generator, discriminator, noise, rng)
    samples = mlp_forward(gen, noise.sample(5000, rng))
    assert abs(samples.mean() - 2.0) < 0.2
