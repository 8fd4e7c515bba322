"""Particle baselines: Stein variational gradient descent and stochastic gradient Langevin dynamics."""

from __future__ import annotations

import numpy as np

from domain.errors import NonFiniteError, ShapeError
from domain.interfaces import SteinKernel, Target
from domain.models import FloatArray, ParticleSet
from infrastructure.kernels import RbfKernel

SVGD_DEFAULT_STEP = 0.3
SGLD_DEFAULT_BASE = 0.1
SGLD_DEFAULT_DECAY = 0.55
# stands in for the median heuristic when the particles give it nothing to measure
FALLBACK_BANDWIDTH_SQ = 1.0


def _fit_kernel(kernel: SteinKernel, positions: FloatArray) -> SteinKernel:
    if isinstance(kernel, RbfKernel) and kernel.is_adaptive:
        try:
            return kernel.fitted(positions)
        except ValueError:
            # one particle, or all particles coincide: phi' vanishes on every pair
            return RbfKernel(FALLBACK_BANDWIDTH_SQ)
    return kernel.fitted(positions)


def svgd_direction(target: Target, kernel: SteinKernel, positions: FloatArray) -> FloatArray:
    """phi(x_i) = (1/n) sum_j k(x_j, x_i) S_q(x_j) + grad_{x_j} k(x_j, x_i)."""
    X = np.asarray(positions, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != target.dim or X.shape[0] < 1:
        raise ShapeError("svgd_step", [X.shape], f"expected (n >= 1, {target.dim})")
    fitted = _fit_kernel(kernel, X)
    source = X[:, None, :]  # x_j along axis 0
    sink = X[None, :, :]  # x_i along axis 1
    weights = np.asarray(fitted.evaluate(source, sink))
    repulsion = fitted.grad_x(source, sink)
    drive = np.einsum("ji,jd->id", weights, target.score(X))
    return (drive + repulsion.sum(axis=0)) / X.shape[0]


def svgd_step(
    target: Target, kernel: SteinKernel, particles: ParticleSet, step_size: float = SVGD_DEFAULT_STEP
) -> ParticleSet:
    if step_size < 0:
        raise ValueError(f"step_size must be non-negative, got {step_size}")
    direction = svgd_direction(target, kernel, particles.positions)
    if not np.all(np.isfinite(direction)):
        raise NonFiniteError(
            "non-finite SVGD update",
            diagnostics={"iteration": particles.iteration, "step_size": step_size},
        )
    return ParticleSet(positions=particles.positions + step_size * direction, iteration=particles.iteration + 1)


def sgld_step_size(t: int, base: float = SGLD_DEFAULT_BASE, decay: float = SGLD_DEFAULT_DECAY) -> float:
    """eps_t = base / (t + 1)^decay."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return base / (t + 1.0) ** decay


def sgld_step(
    target: Target,
    x: FloatArray,
    t: int,
    rng: np.random.Generator,
    *,
    base: float = SGLD_DEFAULT_BASE,
    decay: float = SGLD_DEFAULT_DECAY,
) -> FloatArray:
    """x + (eps_t / 2) S_q(x) + sqrt(eps_t) xi for one state or a batch of chains."""
    state = np.asarray(x, dtype=np.float64)
    eps = sgld_step_size(t, base, decay)
    noise = rng.standard_normal(state.shape)
    moved = state + 0.5 * eps * target.score(state) + np.sqrt(eps) * noise
    if not np.all(np.isfinite(moved)):
        raise NonFiniteError("non-finite Langevin update", diagnostics={"t": t, "step_size": eps})
    return moved


__all__ = [
    "FALLBACK_BANDWIDTH_SQ",
    "SGLD_DEFAULT_BASE",
    "SGLD_DEFAULT_DECAY",
    "SVGD_DEFAULT_STEP",
    "sgld_step",
    "sgld_step_size",
    "svgd_direction",
    "svgd_step",
]
