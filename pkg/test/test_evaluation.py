import numpy as np
import pytest

from application.use_cases import EvaluateSamples
from domain.errors import InsufficientSamplesError, ShapeError
from domain.experiment import EvalSpec
from domain.models import LabeledDataset, RunMetrics
from infrastructure.evaluation import (
    aggregate_runs,
    mmd_u,
    mode_coverage,
    moment_ground_truth,
    moment_stats,
    posterior_accuracy,
)
from infrastructure.kernels import RbfKernel
from infrastructure.targets import IsotropicGaussian, LogisticPosterior, crossed_mixture_new, ring8_new


def test_mmd_of_a_sample_with_itself_is_zero(rng):
    X = rng.normal(size=(30, 2))
    assert mmd_u(X, X) == 0.0


def test_mmd_separates_shifted_samples(rng):
    X = rng.normal(size=(200, 2))
    Y = rng.normal(size=(200, 2))
    Z = rng.normal(size=(200, 2)) + 2.0
    assert mmd_u(X, Z, RbfKernel(1.0)) > 10.0 * abs(mmd_u(X, Y, RbfKernel(1.0)))


def test_mmd_input_checks(rng):
    with pytest.raises(ShapeError):
        mmd_u(rng.normal(size=(5, 2)), rng.normal(size=(5, 3)))
    with pytest.raises(InsufficientSamplesError):
        mmd_u(rng.normal(size=(1, 2)), rng.normal(size=(5, 2)))


def test_moment_stats_use_population_sd():
    X = np.array([[0.0, 1.0], [2.0, 3.0]])
    h1, h2 = moment_stats(X)
    assert h1 == pytest.approx(3.0)
    assert h2 == pytest.approx(2.0)
    with pytest.raises(ShapeError):
        moment_stats(np.zeros((4, 3)))


def test_moment_ground_truth_of_ring():
    truth = moment_ground_truth(ring8_new())
    assert truth["h1"] == pytest.approx(0.0, abs=1e-12)
    assert truth["h2"] == pytest.approx(2.0 * np.sqrt(113.5))
    assert moment_ground_truth(IsotropicGaussian(np.zeros(3))) is None


def test_mode_coverage_counts_visited_modes():
    target = ring8_new()
    samples = np.vstack([np.tile(target.modes[0], (10, 1)), np.tile(target.modes[3], (10, 1)), [target.modes[5]]])
    assert mode_coverage(samples, target.modes, 3.0) == 2
    assert mode_coverage(np.zeros((5, 2)), target.modes, 3.0) == 0
    with pytest.raises(ValueError):
        mode_coverage(samples, target.modes, 0.0)


def test_mode_coverage_of_exact_ring_draws(rng):
    target = ring8_new()
    assert mode_coverage(target.sample(2000, rng), target.modes, 3.0) == 8


def test_posterior_accuracy_with_perfect_weights():
    features = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 2.0], [0.0, -2.0]])
    labels = np.array([1.0, -1.0, 1.0, -1.0])
    weights = np.array([[1.0, 1.0, 5.0], [2.0, 1.0, -3.0]])
    assert posterior_accuracy(weights, features, labels) == 1.0
    assert posterior_accuracy(-weights[:, :2], features, labels) == 0.0


def test_posterior_accuracy_ties_predict_positive():
    features = np.array([[1.0], [2.0]])
    labels = np.array([1.0, -1.0])
    assert posterior_accuracy(np.zeros((3, 1)), features, labels) == 0.5


def test_aggregate_reports_mean_error_and_mse():
    runs = [RunMetrics(seed=0, h1=0.0), RunMetrics(seed=1, h1=2.0)]
    report = aggregate_runs(runs, {"h1": 0.0})
    summary = report.summaries["h1"]
    assert summary.mean == pytest.approx(1.0)
    assert summary.standard_error == pytest.approx(1.0)
    assert summary.mse == pytest.approx(2.0)
    assert "mmd" not in report.summaries
    assert report.run_count == 2
    with pytest.raises(InsufficientSamplesError):
        aggregate_runs([])


def test_evaluate_samples_skips_inapplicable_metrics(rng):
    spec = EvalSpec(metrics=("moments", "mmd", "mode_coverage"), reference_size=200, mode_radius=1.0)
    target = crossed_mixture_new()
    samples = target.sample(300, rng)
    metrics = EvaluateSamples(spec, target).execute(samples, 7, rng)
    assert metrics.seed == 7
    assert metrics.h1 is not None and metrics.h2 is not None
    assert metrics.mmd is not None and metrics.mmd < 0.05
    assert metrics.mode_coverage == 2
    assert metrics.accuracy is None


def test_evaluate_samples_accuracy_uses_test_split(rng):
    features = rng.normal(size=(10, 2))
    labels = np.where(features[:, 0] > 0, 1.0, -1.0)
    dataset = LabeledDataset(features, labels, np.arange(8), np.arange(8, 10))
    target = LogisticPosterior.from_dataset(dataset)
    spec = EvalSpec(metrics=("moments", "accuracy", "mmd"), posterior_samples=2)
    samples = np.array([[5.0, 0.0, 0.0], [4.0, 0.0, 1.0], [-100.0, 0.0, 0.0]])
    metrics = EvaluateSamples(spec, target, dataset).execute(samples, 0, rng)
    assert metrics.accuracy == 1.0
    assert metrics.h1 is None
    assert metrics.mmd is None
