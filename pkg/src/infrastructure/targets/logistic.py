"""Hierarchical Bayesian logistic regression posterior.

Labels y_i in {-1, +1}; prior w | alpha ~ N(0, alpha^-1 I), alpha ~ Gamma(a, rate b).
The sampled vector is (w, log alpha); the change of variables adds log alpha to
the log density, so the alpha terms read (p/2 + a) log alpha - alpha (|w|^2/2 + b).
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, log_expit

from domain.errors import InsufficientSamplesError, ShapeError
from domain.interfaces import Target
from domain.models import FloatArray, LabeledDataset

DEFAULT_PRIOR_SHAPE = 1.0
DEFAULT_PRIOR_RATE = 0.01


class LogisticPosterior(Target):
    def __init__(
        self,
        features: FloatArray,
        labels: FloatArray,
        *,
        prior_shape: float = DEFAULT_PRIOR_SHAPE,
        prior_rate: float = DEFAULT_PRIOR_RATE,
        likelihood_scale: float = 1.0,
    ) -> None:
        self.features = np.asarray(features, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=np.float64)
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            raise ShapeError("logistic_posterior", [self.features.shape, self.labels.shape])
        if self.features.shape[0] == 0:
            raise InsufficientSamplesError("logistic posterior", 1, 0)
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or +1")
        if prior_shape <= 0 or prior_rate <= 0:
            raise ValueError("Gamma prior shape and rate must be positive")
        self.prior_shape = float(prior_shape)
        self.prior_rate = float(prior_rate)
        self.likelihood_scale = float(likelihood_scale)
        self.num_features = int(self.features.shape[1])
        self.num_data = int(self.features.shape[0])
        self.dim = self.num_features + 1

    @classmethod
    def from_dataset(cls, dataset: LabeledDataset, **kwargs: float) -> LogisticPosterior:
        """Posterior conditioned on the training split."""
        return cls(dataset.train_features, dataset.train_labels, **kwargs)

    def minibatch(self, indices: np.ndarray) -> LogisticPosterior:
        """Stochastic view over a subset, likelihood rescaled by N / |batch|."""
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise InsufficientSamplesError("logistic minibatch", 1, 0)
        return LogisticPosterior(
            self.features[idx],
            self.labels[idx],
            prior_shape=self.prior_shape,
            prior_rate=self.prior_rate,
            likelihood_scale=self.likelihood_scale * self.num_data / idx.size,
        )

    def _split(self, batch: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray]:
        w = batch[:, : self.num_features]
        log_alpha = batch[:, self.num_features]
        margins = (w @ self.features.T) * self.labels  # (n, N)
        return w, log_alpha, margins

    def log_density_unnorm(self, x: FloatArray) -> FloatArray | float:
        batch, single = self._as_batch(x, "log_density_unnorm")
        w, log_alpha, margins = self._split(batch)
        alpha = np.exp(log_alpha)
        values = (
            self.likelihood_scale * np.sum(log_expit(margins), axis=1)
            + (0.5 * self.num_features + self.prior_shape) * log_alpha
            - alpha * (0.5 * np.sum(w * w, axis=1) + self.prior_rate)
        )
        return float(values[0]) if single else values

    def score(self, x: FloatArray) -> FloatArray:
        batch, single = self._as_batch(x, "score")
        w, log_alpha, margins = self._split(batch)
        alpha = np.exp(log_alpha)
        likelihood = self.likelihood_scale * ((expit(-margins) * self.labels) @ self.features)
        grad_w = likelihood - alpha[:, None] * w
        grad_log_alpha = (
            0.5 * self.num_features + self.prior_shape - alpha * (0.5 * np.sum(w * w, axis=1) + self.prior_rate)
        )
        values = np.concatenate([grad_w, grad_log_alpha[:, None]], axis=1)
        return values[0] if single else values

    def score_jacobian(self, x: FloatArray) -> FloatArray:
        batch, single = self._as_batch(x, "score_jacobian")
        w, log_alpha, margins = self._split(batch)
        alpha = np.exp(log_alpha)
        p = self.num_features
        curvature = expit(margins) * expit(-margins)  # (n, N)
        values = np.zeros((batch.shape[0], self.dim, self.dim))
        values[:, :p, :p] = -self.likelihood_scale * np.einsum(
            "nb,bi,bj->nij", curvature, self.features, self.features, optimize=True
        )
        values[:, :p, :p] -= alpha[:, None, None] * np.eye(p)
        values[:, :p, p] = -alpha[:, None] * w
        values[:, p, :p] = -alpha[:, None] * w
        values[:, p, p] = -alpha * (0.5 * np.sum(w * w, axis=1) + self.prior_rate)
        values = 0.5 * (values + np.swapaxes(values, 1, 2))
        return values[0] if single else values


def logistic_posterior_score(
    target: LogisticPosterior, w_aug: FloatArray, minibatch_indices: np.ndarray
) -> FloatArray:
    """Stochastic score (N / |batch|) sum_batch grad log sigma(y w.x) + grad log prior."""
    return target.minibatch(minibatch_indices).score(w_aug)


__all__ = ["LogisticPosterior", "logistic_posterior_score", "DEFAULT_PRIOR_SHAPE", "DEFAULT_PRIOR_RATE"]
