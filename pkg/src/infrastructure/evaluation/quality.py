from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit

from domain.errors import InsufficientSamplesError, ShapeError
from domain.interfaces import Target
from domain.models import FloatArray, MetricReport, MetricSummary, RunMetrics
from infrastructure.kernels import RadialKernel, RbfKernel, median_heuristic

REPORTED_METRICS = ("h1", "h2", "mmd", "mode_coverage", "accuracy")


def _as_samples(X: FloatArray, op: str) -> FloatArray:
    array = np.asarray(X, dtype=np.float64)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:
        raise ShapeError(op, [array.shape], "expected an (n, d) sample matrix")
    return array


def _off_diagonal_mean(matrix: FloatArray) -> float:
    n = matrix.shape[0]
    values = matrix[~np.eye(n, dtype=bool)]
    return math.fsum(values.tolist()) / values.size


def mmd_u(X: FloatArray, Y: FloatArray, kernel: RadialKernel | None = None) -> float:
    """Unbiased squared MMD.

    Without a kernel, an RBF kernel is fitted once on the pooled sample. With
    n = m the cross term skips paired indices, so mmd_u(X, X) is exactly zero.
    """
    xs = _as_samples(X, "mmd_u")
    ys = _as_samples(Y, "mmd_u")
    if xs.shape[1] != ys.shape[1]:
        raise ShapeError("mmd_u", [xs.shape, ys.shape], "samples must share their dimension")
    for sample in (xs, ys):
        if sample.shape[0] < 2:
            raise InsufficientSamplesError("mmd_u", 2, sample.shape[0])
    if kernel is None:
        kernel = RbfKernel(median_heuristic(np.vstack([xs, ys])))

    within_x = _off_diagonal_mean(kernel.gram(xs, xs))
    within_y = _off_diagonal_mean(kernel.gram(ys, ys))
    cross_matrix = kernel.gram(xs, ys)
    if xs.shape[0] == ys.shape[0]:
        cross = _off_diagonal_mean(cross_matrix)
    else:
        cross = math.fsum(cross_matrix.ravel().tolist()) / cross_matrix.size
    return (within_x + within_y) - 2.0 * cross


def moment_stats(X: FloatArray) -> tuple[float, float]:
    """h1 = mean(X_1) + mean(X_2), h2 = sd(X_1) + sd(X_2) with divisor n."""
    samples = _as_samples(X, "moment_stats")
    if samples.shape[1] != 2:
        raise ShapeError("moment_stats", [samples.shape], "moment statistics are defined for 2-D samples")
    if samples.shape[0] < 2:
        raise InsufficientSamplesError("moment_stats", 2, samples.shape[0])
    means = samples.mean(axis=0)
    sds = samples.std(axis=0)
    return float(means[0] + means[1]), float(sds[0] + sds[1])


def moment_ground_truth(target: Target) -> dict[str, float] | None:
    mean = target.mean()
    sd = target.marginal_sd()
    if target.dim != 2 or mean is None or sd is None:
        return None
    return {"h1": float(mean[0] + mean[1]), "h2": float(sd[0] + sd[1])}


def mode_coverage(X: FloatArray, modes: Sequence[FloatArray], radius: float) -> int:
    """Number of modes with at least max(2, 0.02 n) samples inside `radius`."""
    if len(modes) == 0:
        raise ValueError("mode_coverage needs at least one mode")
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    samples = _as_samples(X, "mode_coverage")
    centers = np.stack([np.asarray(mode, dtype=np.float64) for mode in modes])
    if centers.shape[1] != samples.shape[1]:
        raise ShapeError("mode_coverage", [samples.shape, centers.shape], "modes must match the sample dimension")
    threshold = max(2.0, 0.02 * samples.shape[0])
    diff = samples[:, None, :] - centers[None, :, :]
    inside = np.sum(diff * diff, axis=-1) <= radius * radius
    return int(np.count_nonzero(inside.sum(axis=0) >= threshold))


def posterior_accuracy(weight_samples: FloatArray, features: FloatArray, labels: FloatArray) -> float:
    """Test accuracy of the posterior predictive mean of sigma(w . x).

    Only the first p columns of each sample are weights; the trailing log-precision
    column is ignored. Probabilities of exactly 0.5 predict +1.
    """
    weights = _as_samples(weight_samples, "posterior_accuracy")
    design = np.asarray(features, dtype=np.float64)
    truth = np.asarray(labels, dtype=np.float64)
    if design.ndim != 2 or design.shape[0] == 0:
        raise InsufficientSamplesError("posterior_accuracy test set", 1, 0 if design.ndim != 2 else design.shape[0])
    if weights.shape[0] < 1:
        raise InsufficientSamplesError("posterior_accuracy weight samples", 1, 0)
    p = design.shape[1]
    if weights.shape[1] not in (p, p + 1) or truth.shape != (design.shape[0],):
        raise ShapeError("posterior_accuracy", [weights.shape, design.shape, truth.shape])
    probability = expit(design @ weights[:, :p].T).mean(axis=1)
    predicted = np.where(probability >= 0.5, 1.0, -1.0)
    return float(np.mean(predicted == truth))


def _summarize(values: Sequence[float], truth: float | None) -> MetricSummary:
    array = np.asarray(values, dtype=np.float64)
    standard_error = float(array.std(ddof=1) / math.sqrt(array.size)) if array.size > 1 else 0.0
    mse = float(np.mean((array - truth) ** 2)) if truth is not None else None
    return MetricSummary(mean=float(array.mean()), standard_error=standard_error, mse=mse)


def aggregate_runs(
    runs: Sequence[RunMetrics], ground_truth: Mapping[str, float] | None = None
) -> MetricReport:
    """Across-run means, standard errors, and MSE against `ground_truth` where given."""
    if not runs:
        raise InsufficientSamplesError("aggregate_runs", 1, 0)
    truth = dict(ground_truth or {})
    summaries: dict[str, MetricSummary] = {}
    for name in REPORTED_METRICS:
        values = [getattr(run, name) for run in runs if getattr(run, name) is not None]
        if values:
            summaries[name] = _summarize([float(v) for v in values], truth.get(name))
    return MetricReport(runs=tuple(runs), summaries=summaries)


__all__ = [
    "REPORTED_METRICS",
    "aggregate_runs",
    "mmd_u",
    "mode_coverage",
    "moment_ground_truth",
    "moment_stats",
    "posterior_accuracy",
]
