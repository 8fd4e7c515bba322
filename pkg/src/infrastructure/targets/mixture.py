from __future__ import annotations

from typing import Sequence, Union

import numpy as np
from scipy.special import logsumexp, softmax

from domain.errors import ShapeError
from domain.interfaces import Target
from domain.models import FloatArray

from .gaussian import Gaussian, IsotropicGaussian

Component = Union[Gaussian, IsotropicGaussian]


class GaussianMixture(Target):
    """Finite Gaussian mixture; all density work happens in log space."""

    def __init__(
        self,
        weights: Sequence[float],
        components: Sequence[Component],
        *,
        landmarks: Sequence[FloatArray] | None = None,
    ) -> None:
        self.weights = np.asarray(weights, dtype=np.float64)
        if len(components) == 0 or self.weights.shape != (len(components),):
            raise ShapeError("mixture", [self.weights.shape, (len(components),)], "one weight per component")
        if np.any(self.weights <= 0):
            raise ValueError("mixture weights must be positive")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1, got {float(np.sum(self.weights))!r}")
        dims = {component.dim for component in components}
        if len(dims) != 1:
            raise ShapeError("mixture", [(d,) for d in sorted(dims)], "components disagree on dimension")
        self.components = tuple(components)
        self.dim = dims.pop()
        self._log_weights = np.log(self.weights)
        self._landmarks = (
            tuple(np.asarray(point, dtype=np.float64) for point in landmarks)
            if landmarks is not None
            else None
        )

    def _component_log_densities(self, batch: FloatArray) -> FloatArray:
        # (K, n)
        return np.stack([np.atleast_1d(c.log_density(batch)) for c in self.components]) + self._log_weights[:, None]

    def log_density_unnorm(self, x: FloatArray) -> FloatArray | float:
        batch, single = self._as_batch(x, "log_density_unnorm")
        values = logsumexp(self._component_log_densities(batch), axis=0)
        return float(values[0]) if single else values

    def responsibilities(self, x: FloatArray) -> FloatArray:
        batch, single = self._as_batch(x, "responsibilities")
        values = softmax(self._component_log_densities(batch), axis=0).T
        return values[0] if single else values

    def _score_parts(self, batch: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray]:
        resp = softmax(self._component_log_densities(batch), axis=0)  # (K, n)
        scores = np.stack([c.score(batch) for c in self.components])  # (K, n, d)
        mixed = np.einsum("kn,knd->nd", resp, scores)
        return resp, scores, mixed

    def score(self, x: FloatArray) -> FloatArray:
        batch, single = self._as_batch(x, "score")
        _, _, mixed = self._score_parts(batch)
        return mixed[0] if single else mixed

    def score_jacobian(self, x: FloatArray) -> FloatArray:
        """sum_k r_k (J_k + s_k s_k^T) - s s^T."""
        batch, single = self._as_batch(x, "score_jacobian")
        resp, scores, mixed = self._score_parts(batch)
        jacobians = np.stack([c.score_jacobian(batch) for c in self.components])  # (K, n, d, d)
        outer = scores[..., :, None] * scores[..., None, :]
        values = np.einsum("kn,knij->nij", resp, jacobians + outer)
        values = values - mixed[:, :, None] * mixed[:, None, :]
        values = 0.5 * (values + np.swapaxes(values, 1, 2))
        return values[0] if single else values

    def sample(self, n: int, rng: np.random.Generator) -> FloatArray:
        labels = rng.choice(len(self.components), size=n, p=self.weights)
        out = np.empty((n, self.dim))
        for index, component in enumerate(self.components):
            mask = labels == index
            count = int(np.count_nonzero(mask))
            if count:
                out[mask] = component.sample(count, rng)
        return out

    @property
    def modes(self) -> tuple[FloatArray, ...]:
        if self._landmarks is not None:
            return self._landmarks
        return tuple(component.mean() for component in self.components)

    def mean(self) -> FloatArray:
        return np.einsum("k,kd->d", self.weights, np.stack([c.mean() for c in self.components]))

    def marginal_sd(self) -> FloatArray:
        means = np.stack([c.mean() for c in self.components])
        variances = np.stack([c.marginal_sd() ** 2 for c in self.components])
        second = np.einsum("k,kd->d", self.weights, variances + means * means)
        overall = self.mean()
        return np.sqrt(second - overall * overall)


def ring8_new(radius: float = 15.0, component_sd: float = 1.0) -> GaussianMixture:
    """Eight equal-weight isotropic components at angles 2 pi k / 8, the first at (radius, 0)."""
    if radius <= 0 or component_sd <= 0:
        raise ValueError("radius and component_sd must be positive")
    angles = 2.0 * np.pi * np.arange(8) / 8.0
    components = [
        IsotropicGaussian(radius * np.array([np.cos(angle), np.sin(angle)]), component_sd**2)
        for angle in angles
    ]
    return GaussianMixture(np.full(8, 1.0 / 8.0), components)


def crossed_mixture_new(correlation: float = 0.8, ridge_distance: float = 2.0) -> GaussianMixture:
    """0.5 N(0, I_2(rho)) + 0.5 N(0, I_2(-rho)): two ridges crossing at the origin.

    Both means sit at the origin, so mode coverage is measured at one landmark per
    ridge, `ridge_distance` out along each component's major axis.
    """
    if not 0.0 < abs(correlation) < 1.0:
        raise ValueError(f"correlation must lie in (-1, 1) and be nonzero, got {correlation}")
    rho = abs(correlation)
    components = [
        Gaussian(np.zeros(2), np.array([[1.0, rho], [rho, 1.0]])),
        Gaussian(np.zeros(2), np.array([[1.0, -rho], [-rho, 1.0]])),
    ]
    offset = ridge_distance / np.sqrt(2.0)
    landmarks = [np.array([offset, offset]), np.array([offset, -offset])]
    return GaussianMixture([0.5, 0.5], components, landmarks=landmarks)


__all__ = ["GaussianMixture", "ring8_new", "crossed_mixture_new"]
