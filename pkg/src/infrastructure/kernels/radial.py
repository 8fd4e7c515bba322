"""Radial Stein kernels k(x, y) = phi(|x - y|^2).

With r = x - y and s = |r|^2 every derivative needed by the Stein kernel follows
from phi and its first three derivatives in s:

    grad_x k          = 2 phi'(s) r
    grad_y k          = -2 phi'(s) r
    d/dx_a d/dy_b k   = -2 phi'(s) delta_ab - 4 phi''(s) r_a r_b
    trace_xy          = -2 d phi'(s) - 4 s phi''(s)
    grad_x trace_xy   = -(4 (d + 2) phi''(s) + 8 s phi'''(s)) r
"""

from __future__ import annotations

from abc import abstractmethod
from typing import NamedTuple

import numpy as np

from domain.errors import InsufficientSamplesError, ShapeError
from domain.interfaces import SteinKernel
from domain.models import FloatArray


class RadialProfile(NamedTuple):
    phi: FloatArray
    d1: FloatArray
    d2: FloatArray
    d3: FloatArray


def pairwise_differences(X: FloatArray, Y: FloatArray) -> FloatArray:
    """(n, m, d) array of x_i - y_j."""
    return X[:, None, :] - Y[None, :, :]


def pairwise_sq_dists(X: FloatArray, Y: FloatArray) -> FloatArray:
    diff = pairwise_differences(X, Y)
    return np.sum(diff * diff, axis=-1)


def median_heuristic(X: FloatArray) -> float:
    """Squared bandwidth h = med^2 / log(n + 1) from the median pairwise distance."""
    samples = np.asarray(X, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    n = samples.shape[0]
    if n < 2:
        raise InsufficientSamplesError("median heuristic", 2, n)
    rows, cols = np.triu_indices(n, k=1)
    distances = np.sqrt(pairwise_sq_dists(samples, samples)[rows, cols])
    med = float(np.median(distances))
    if med <= 0.0:
        raise ValueError("median heuristic undefined: median pairwise distance is zero")
    return med * med / np.log(n + 1.0)


class RadialKernel(SteinKernel):
    """Shared derivative harness; subclasses only provide the radial profile."""

    @abstractmethod
    def profile(self, sq_dist: FloatArray) -> RadialProfile:
        """phi and its first three derivatives at s = |x - y|^2."""

    @staticmethod
    def _pair(x: FloatArray, y: FloatArray, op: str) -> tuple[FloatArray, FloatArray]:
        xa = np.asarray(x, dtype=np.float64)
        ya = np.asarray(y, dtype=np.float64)
        if xa.shape[-1:] != ya.shape[-1:]:
            raise ShapeError(op, [xa.shape, ya.shape], "points must share their dimension")
        r = xa - ya
        return r, np.sum(r * r, axis=-1)

    def evaluate(self, x: FloatArray, y: FloatArray) -> FloatArray | float:
        _, s = self._pair(x, y, "kernel_eval")
        return self.profile(s).phi

    def grad_x(self, x: FloatArray, y: FloatArray) -> FloatArray:
        r, s = self._pair(x, y, "kernel_grad_x")
        return 2.0 * np.asarray(self.profile(s).d1)[..., None] * r

    def grad_y(self, x: FloatArray, y: FloatArray) -> FloatArray:
        r, s = self._pair(x, y, "kernel_grad_y")
        return -2.0 * np.asarray(self.profile(s).d1)[..., None] * r

    def trace_xy(self, x: FloatArray, y: FloatArray) -> FloatArray | float:
        r, s = self._pair(x, y, "kernel_trace_xy")
        dim = r.shape[-1]
        prof = self.profile(s)
        return -2.0 * dim * prof.d1 - 4.0 * s * prof.d2

    def grads_of_uq_terms(self, x: FloatArray, y: FloatArray) -> tuple[FloatArray, FloatArray]:
        r, s = self._pair(x, y, "kernel_grads_of_uq_terms")
        dim = r.shape[-1]
        prof = self.profile(s)
        d1 = np.asarray(prof.d1)[..., None, None]
        d2 = np.asarray(prof.d2)[..., None, None]
        cross = -2.0 * d1 * np.eye(dim) - 4.0 * d2 * (r[..., :, None] * r[..., None, :])
        trace_grad = -np.asarray(4.0 * (dim + 2) * prof.d2 + 8.0 * s * prof.d3)[..., None] * r
        return cross, trace_grad

    def gram(self, X: FloatArray, Y: FloatArray) -> FloatArray:
        return self.profile(pairwise_sq_dists(X, Y)).phi


class RbfKernel(RadialKernel):
    """exp(-|x - y|^2 / h); with no bandwidth the median heuristic is fitted per batch."""

    def __init__(self, bandwidth_sq: float | None = None) -> None:
        if bandwidth_sq is not None and bandwidth_sq <= 0:
            raise ValueError(f"bandwidth must be positive, got {bandwidth_sq}")
        self.bandwidth_sq = bandwidth_sq

    @property
    def is_adaptive(self) -> bool:
        return self.bandwidth_sq is None

    def fitted(self, samples: FloatArray) -> RbfKernel:
        if self.bandwidth_sq is not None:
            return self
        return RbfKernel(median_heuristic(samples))

    def profile(self, sq_dist: FloatArray) -> RadialProfile:
        if self.bandwidth_sq is None:
            raise ValueError("adaptive RBF kernel has no bandwidth yet; call fitted(samples)")
        h = self.bandwidth_sq
        phi = np.exp(-np.asarray(sq_dist, dtype=np.float64) / h)
        return RadialProfile(phi=phi, d1=-phi / h, d2=phi / h**2, d3=-phi / h**3)

    def __repr__(self) -> str:
        return f"RbfKernel(bandwidth_sq={self.bandwidth_sq!r})"


class ImqKernel(RadialKernel):
    """(c^2 + |x - y|^2)^beta with c > 0 and beta in (-1, 0); bounded by c^(2 beta)."""

    def __init__(self, c: float = 1.0, beta: float = -0.5) -> None:
        if c <= 0:
            raise ValueError(f"IMQ c must be positive, got {c}")
        if not -1.0 < beta < 0.0:
            raise ValueError(f"IMQ beta must lie in (-1, 0), got {beta}")
        self.c = float(c)
        self.beta = float(beta)

    @property
    def bandwidth_sq(self) -> None:
        return None

    def profile(self, sq_dist: FloatArray) -> RadialProfile:
        beta = self.beta
        base = self.c * self.c + np.asarray(sq_dist, dtype=np.float64)
        phi = base**beta
        d1 = beta * phi / base
        d2 = (beta - 1.0) * d1 / base
        d3 = (beta - 2.0) * d2 / base
        return RadialProfile(phi=phi, d1=d1, d2=d2, d3=d3)

    def __repr__(self) -> str:
        return f"ImqKernel(c={self.c!r}, beta={self.beta!r})"


__all__ = [
    "RadialProfile",
    "RadialKernel",
    "RbfKernel",
    "ImqKernel",
    "median_heuristic",
    "pairwise_differences",
    "pairwise_sq_dists",
]
