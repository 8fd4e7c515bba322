"""Adversarial Fisher objective

    L(eta, lambda) = E_p[S_q(x).f(x) + tr grad f(x)] - lambda E_p |f(x)|^2

with f a square discriminator network. The inner maximum over f is attained at
f* = (S_q - S_p) / (2 lambda), where L equals E_p |S_q - S_p|^2 / (4 lambda).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from domain.errors import NonFiniteError, ShapeError
from domain.interfaces import Target
from domain.models import FloatArray
from infrastructure.autodiff import Tape
from infrastructure.networks import (
    Mlp,
    RmsPropState,
    build_graph,
    clip_weights,
    input_jacobian_trace,
    jacobian_trace,
    mlp_forward,
    rmsprop_step,
)
from infrastructure.networks.optim import DEFAULT_DECAY, DEFAULT_EPSILON

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA = 0.5
DEFAULT_DISCRIMINATOR_STEPS = 5


@dataclass(frozen=True)
class FisherConfig:
    lam: float = DEFAULT_LAMBDA
    discriminator_steps: int = DEFAULT_DISCRIMINATOR_STEPS
    learning_rate: float = 1e-3
    discriminator_learning_rate: float = 1e-3
    batch_size: int = 100
    iterations: int = 10000
    discriminator_clip: float | None = None
    clip: float | None = None
    decay: float = DEFAULT_DECAY
    epsilon: float = DEFAULT_EPSILON
    data_batch_size: int = 100

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if self.discriminator_steps < 1:
            raise ValueError(f"discriminator_steps must be at least 1, got {self.discriminator_steps}")
        if self.learning_rate <= 0 or self.discriminator_learning_rate <= 0:
            raise ValueError("learning rates must be positive")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be non-negative, got {self.iterations}")
        if self.discriminator_clip is not None and self.discriminator_clip <= 0:
            raise ValueError(f"discriminator_clip must be positive, got {self.discriminator_clip}")
        if self.clip is not None and self.clip <= 0:
            raise ValueError(f"clip must be positive, got {self.clip}")


@dataclass(frozen=True)
class FisherGradients:
    loss: float
    # mean |f(x)|^2 on the batch
    norm: float
    parameter_grads: list[FloatArray]
    sample_grads: FloatArray


def _check(target: Target, discriminator: Mlp, X: FloatArray, op: str) -> FloatArray:
    array = np.asarray(X, dtype=np.float64)
    if discriminator.input_dim != target.dim or discriminator.output_dim != target.dim:
        raise ShapeError(
            op,
            [(discriminator.input_dim, discriminator.output_dim), (target.dim,)],
            "discriminator must map R^d to R^d",
        )
    if array.ndim != 2 or array.shape[1] != target.dim or array.shape[0] < 1:
        raise ShapeError(op, [array.shape], f"expected (n >= 1, {target.dim})")
    return array


def stein_operator_mean(target: Target, discriminator: Mlp, X: FloatArray) -> float:
    """(1/n) sum_i S_q(x_i).f(x_i) + tr grad f(x_i), traces from one backward pass per coordinate."""
    batch = _check(target, discriminator, X, "stein_operator_mean")
    outputs = mlp_forward(discriminator, batch)
    score_term = np.sum(target.score(batch) * outputs, axis=1)
    traces = input_jacobian_trace(discriminator, batch)
    return float(np.mean(score_term + traces))


def discriminator_norm(discriminator: Mlp, X: FloatArray) -> float:
    """Mean |f(x)|^2; tends to zero as the sample law approaches the target."""
    outputs = mlp_forward(discriminator, np.asarray(X, dtype=np.float64))
    return float(np.mean(np.sum(outputs * outputs, axis=1)))


def fisher_loss(target: Target, discriminator: Mlp, X: FloatArray, lam: float) -> float:
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    batch = _check(target, discriminator, X, "fisher_loss")
    return stein_operator_mean(target, discriminator, batch) - lam * discriminator_norm(discriminator, batch)


def fisher_gradients(target: Target, discriminator: Mlp, X: FloatArray, lam: float) -> FisherGradients:
    """Loss with gradients in the discriminator parameters and in every sample.

    The score enters the tape as a constant; its own dependence on x contributes
    the analytic term (1/n) J_S(x_i)^T f(x_i) to the sample gradients.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    batch = _check(target, discriminator, X, "fisher_gradients")
    n = batch.shape[0]
    scores = target.score(batch)

    tape = Tape()
    graph = build_graph(tape, discriminator, tape.input(batch))
    score_term = tape.sum(tape.mul(tape.input(scores), graph.output))
    trace_term = jacobian_trace(tape, discriminator, graph)
    penalty = tape.sum(tape.square(graph.output))
    loss = tape.add(
        tape.scale(tape.add(score_term, trace_term), 1.0 / n),
        tape.scale(penalty, -lam / n),
    )
    grads = tape.backward(loss)

    parameter_grads = [grads.get(node.id, np.zeros_like(node.value)) for node in graph.parameters]
    outputs = graph.output.value
    sample_grads = grads.get(graph.input.id, np.zeros_like(batch))
    sample_grads = sample_grads + np.einsum("nab,na->nb", target.score_jacobian(batch), outputs) / n

    value = float(loss.value)
    norm = float(np.mean(np.sum(outputs * outputs, axis=1)))
    if not np.isfinite(value):
        raise NonFiniteError("non-finite Fisher loss", diagnostics={"loss": value, "discriminator_norm": norm})
    return FisherGradients(loss=value, norm=norm, parameter_grads=parameter_grads, sample_grads=sample_grads)


def discriminator_ascent_step(
    target: Target,
    discriminator: Mlp,
    state: RmsPropState,
    X: FloatArray,
    *,
    lam: float,
    learning_rate: float,
    clip: float | None = None,
) -> tuple[Mlp, RmsPropState, FisherGradients]:
    """One RMSProp ascent step on L in the discriminator parameters."""
    gradients = fisher_gradients(target, discriminator, X, lam)
    ascent = [-g for g in gradients.parameter_grads]
    updated, state = rmsprop_step(state, discriminator, ascent, learning_rate)
    if clip is not None:
        updated = clip_weights(updated, clip)
    return updated, state, gradients


def optimal_discriminator_residual(
    target_q: Target, known_p: Target, discriminator: Mlp, X: FloatArray, lam: float
) -> float:
    """Relative squared L2(p) distance from f to (S_q - S_p) / (2 lambda)."""
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    batch = _check(target_q, discriminator, X, "optimal_discriminator_residual")
    if known_p.dim != target_q.dim:
        raise ShapeError("optimal_discriminator_residual", [(known_p.dim,), (target_q.dim,)])
    optimum = (target_q.score(batch) - known_p.score(batch)) / (2.0 * lam)
    residual = mlp_forward(discriminator, batch) - optimum
    numerator = float(np.mean(np.sum(residual * residual, axis=1)))
    scale = float(np.mean(np.sum(optimum * optimum, axis=1)))
    return numerator / max(1.0, scale)


__all__ = [
    "DEFAULT_LAMBDA",
    "DEFAULT_DISCRIMINATOR_STEPS",
    "FisherConfig",
    "FisherGradients",
    "discriminator_ascent_step",
    "discriminator_norm",
    "fisher_gradients",
    "fisher_loss",
    "optimal_discriminator_residual",
    "stein_operator_mean",
]
