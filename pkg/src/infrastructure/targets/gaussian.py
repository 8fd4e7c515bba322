from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from domain.errors import ShapeError
from domain.interfaces import Target
from domain.models import FloatArray

_LOG_2PI = float(np.log(2.0 * np.pi))


class IsotropicGaussian(Target):
    """N(mean, variance * I); log density drops every constant, so log q(mean) = 0."""

    def __init__(self, mean: FloatArray, variance: float = 1.0) -> None:
        self._mean = np.atleast_1d(np.asarray(mean, dtype=np.float64)).copy()
        if self._mean.ndim != 1:
            raise ShapeError("isotropic_gaussian", [self._mean.shape], "mean must be a vector")
        if variance <= 0:
            raise ValueError(f"variance must be positive, got {variance}")
        self.variance = float(variance)
        self.dim = int(self._mean.shape[0])

    def log_density_unnorm(self, x: FloatArray) -> FloatArray | float:
        batch, single = self._as_batch(x, "log_density_unnorm")
        diff = batch - self._mean
        values = -0.5 * np.sum(diff * diff, axis=1) / self.variance
        return float(values[0]) if single else values

    def log_density(self, x: FloatArray) -> FloatArray | float:
        """Normalized log density."""
        constant = -0.5 * self.dim * (_LOG_2PI + np.log(self.variance))
        return self.log_density_unnorm(x) + constant

    def score(self, x: FloatArray) -> FloatArray:
        batch, single = self._as_batch(x, "score")
        values = (self._mean - batch) / self.variance
        return values[0] if single else values

    def score_jacobian(self, x: FloatArray) -> FloatArray:
        batch, single = self._as_batch(x, "score_jacobian")
        block = -np.eye(self.dim) / self.variance
        values = np.broadcast_to(block, (batch.shape[0], self.dim, self.dim)).copy()
        return values[0] if single else values

    def sample(self, n: int, rng: np.random.Generator) -> FloatArray:
        return self._mean + np.sqrt(self.variance) * rng.standard_normal((n, self.dim))

    def mean(self) -> FloatArray:
        return self._mean.copy()

    def marginal_sd(self) -> FloatArray:
        return np.full(self.dim, np.sqrt(self.variance))

    @property
    def covariance(self) -> FloatArray:
        return self.variance * np.eye(self.dim)


class Gaussian(Target):
    """N(mean, covariance) with a Cholesky-factored covariance."""

    def __init__(self, mean: FloatArray, covariance: FloatArray) -> None:
        self._mean = np.atleast_1d(np.asarray(mean, dtype=np.float64)).copy()
        cov = np.atleast_2d(np.asarray(covariance, dtype=np.float64))
        self.dim = int(self._mean.shape[0])
        if cov.shape != (self.dim, self.dim):
            raise ShapeError("gaussian", [self._mean.shape, cov.shape], "covariance must be d x d")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise ValueError("covariance must be symmetric")
        try:
            self._cho = cho_factor(cov, lower=True)
        except LinAlgError as exc:
            raise ValueError("covariance must be positive definite") from exc
        precision = cho_solve(self._cho, np.eye(self.dim))
        self._precision = 0.5 * (precision + precision.T)
        self._covariance = cov.copy()
        self._chol = np.tril(self._cho[0])
        self._log_det = 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    @property
    def covariance(self) -> FloatArray:
        return self._covariance.copy()

    @property
    def precision(self) -> FloatArray:
        return self._precision.copy()

    def log_density_unnorm(self, x: FloatArray) -> FloatArray | float:
        batch, single = self._as_batch(x, "log_density_unnorm")
        diff = batch - self._mean
        values = -0.5 * np.einsum("ni,ij,nj->n", diff, self._precision, diff)
        return float(values[0]) if single else values

    def log_density(self, x: FloatArray) -> FloatArray | float:
        """Normalized log density."""
        constant = -0.5 * (self.dim * _LOG_2PI + self._log_det)
        return self.log_density_unnorm(x) + constant

    def score(self, x: FloatArray) -> FloatArray:
        batch, single = self._as_batch(x, "score")
        values = (self._mean - batch) @ self._precision
        return values[0] if single else values

    def score_jacobian(self, x: FloatArray) -> FloatArray:
        batch, single = self._as_batch(x, "score_jacobian")
        values = np.broadcast_to(-self._precision, (batch.shape[0], self.dim, self.dim)).copy()
        return values[0] if single else values

    def sample(self, n: int, rng: np.random.Generator) -> FloatArray:
        return self._mean + rng.standard_normal((n, self.dim)) @ self._chol.T

    def mean(self) -> FloatArray:
        return self._mean.copy()

    def marginal_sd(self) -> FloatArray:
        return np.sqrt(np.diag(self._covariance))


__all__ = ["IsotropicGaussian", "Gaussian"]
