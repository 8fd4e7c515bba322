from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Protocol, runtime_checkable

import numpy as np

from .errors import ShapeError
from .models import FloatArray


class Target(ABC):
    """Un-normalized density q exposing log q, its score and the score Jacobian.

    Every method accepts either one point of shape (d,) or a batch of shape (n, d)
    and answers with the matching rank: scalar/(n,), (d,)/(n, d), (d, d)/(n, d, d).
    """

    dim: int

    @abstractmethod
    def log_density_unnorm(self, x: FloatArray) -> FloatArray | float:
        """log q(x) up to an additive constant."""

    @abstractmethod
    def score(self, x: FloatArray) -> FloatArray:
        """Gradient of log q at x."""

    @abstractmethod
    def score_jacobian(self, x: FloatArray) -> FloatArray:
        """Jacobian of the score (Hessian of log q) at x."""

    def sample(self, n: int, rng: np.random.Generator) -> FloatArray:
        """Exact draws, for targets where ancestral sampling is available."""
        raise NotImplementedError(f"{type(self).__name__} cannot be sampled exactly")

    @property
    def can_sample(self) -> bool:
        return type(self).sample is not Target.sample

    @property
    def modes(self) -> tuple[FloatArray, ...] | None:
        return None

    def mean(self) -> FloatArray | None:
        return None

    def marginal_sd(self) -> FloatArray | None:
        return None

    def _as_batch(self, x: FloatArray, op: str) -> tuple[FloatArray, bool]:
        array = np.asarray(x, dtype=np.float64)
        single = array.ndim == 1
        batch = array[None, :] if single else array
        if batch.ndim != 2 or batch.shape[1] != self.dim:
            raise ShapeError(op, [array.shape], f"expected last dimension {self.dim}")
        return batch, single


@runtime_checkable
class SupportsMinibatch(Protocol):
    """Targets whose score is a sum over data points and can be subsampled."""

    num_data: int

    def minibatch(self, indices: np.ndarray) -> Target: ...


class SteinKernel(ABC):
    """Positive definite kernel k(x, y) with derivatives through third order."""

    @abstractmethod
    def evaluate(self, x: FloatArray, y: FloatArray) -> FloatArray | float:
        """k(x, y)."""

    @abstractmethod
    def grad_x(self, x: FloatArray, y: FloatArray) -> FloatArray:
        """Gradient of k in its first argument."""

    @abstractmethod
    def grad_y(self, x: FloatArray, y: FloatArray) -> FloatArray:
        """Gradient of k in its second argument."""

    @abstractmethod
    def trace_xy(self, x: FloatArray, y: FloatArray) -> FloatArray | float:
        """Trace of the cross second-derivative matrix d^2 k / dx dy."""

    @abstractmethod
    def grads_of_uq_terms(
        self, x: FloatArray, y: FloatArray
    ) -> tuple[FloatArray, FloatArray]:
        """(d/dx of grad_y k as a matrix, d/dx of trace_xy)."""

    def fitted(self, samples: FloatArray) -> SteinKernel:
        """Kernel to use for this batch; adaptive kernels refit their bandwidth."""
        return self


__all__ = ["Target", "SupportsMinibatch", "SteinKernel"]
