from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from domain.errors import NonFiniteError, ShapeError
from domain.models import FloatArray

from .mlp import Mlp

DEFAULT_DECAY = 0.9
DEFAULT_EPSILON = 1e-8


@dataclass(frozen=True, eq=False)
class RmsPropState:
    """Running means of squared gradients, one array per network parameter."""

    decay: float
    epsilon: float
    accumulators: tuple[FloatArray, ...]

    def __post_init__(self) -> None:
        if not 0.0 < self.decay < 1.0:
            raise ValueError(f"decay must lie in (0, 1), got {self.decay}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @classmethod
    def for_network(
        cls, mlp: Mlp, decay: float = DEFAULT_DECAY, epsilon: float = DEFAULT_EPSILON
    ) -> RmsPropState:
        return cls(
            decay=decay,
            epsilon=epsilon,
            accumulators=tuple(np.zeros_like(p) for p in mlp.parameters()),
        )

    def flat_accumulators(self) -> FloatArray:
        return np.concatenate([a.reshape(-1) for a in self.accumulators])

    def with_flat_accumulators(self, flat: FloatArray) -> RmsPropState:
        sizes = [a.size for a in self.accumulators]
        if flat.shape != (sum(sizes),):
            raise ShapeError("rmsprop.with_flat_accumulators", [flat.shape, (sum(sizes),)])
        restored = []
        offset = 0
        for a in self.accumulators:
            restored.append(np.array(flat[offset : offset + a.size]).reshape(a.shape))
            offset += a.size
        return RmsPropState(decay=self.decay, epsilon=self.epsilon, accumulators=tuple(restored))


def rmsprop_step(
    state: RmsPropState,
    mlp: Mlp,
    param_grads: Sequence[FloatArray],
    learning_rate: float,
) -> tuple[Mlp, RmsPropState]:
    """v <- rho v + (1 - rho) g^2;  theta <- theta - lr g / (sqrt(v) + eps)."""
    params = mlp.parameters()
    if len(param_grads) != len(params) or len(state.accumulators) != len(params):
        raise ShapeError("rmsprop_step", [(len(params),), (len(param_grads),), (len(state.accumulators),)])
    for index, (p, g) in enumerate(zip(params, param_grads)):
        if g.shape != p.shape:
            raise ShapeError("rmsprop_step", [p.shape, g.shape], f"parameter {index}")
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(
                "non-finite gradient, optimizer step aborted",
                diagnostics={"parameter": index, "max_abs_finite": float(np.max(np.abs(g[np.isfinite(g)]), initial=0.0))},
            )

    rho = state.decay
    updated_params = []
    updated_accumulators = []
    for p, g, v in zip(params, param_grads, state.accumulators):
        v_next = rho * v + (1.0 - rho) * g * g
        updated_params.append(p - learning_rate * g / (np.sqrt(v_next) + state.epsilon))
        updated_accumulators.append(v_next)
    return (
        mlp.with_parameters(updated_params),
        RmsPropState(decay=state.decay, epsilon=state.epsilon, accumulators=tuple(updated_accumulators)),
    )


__all__ = ["RmsPropState", "rmsprop_step", "DEFAULT_DECAY", "DEFAULT_EPSILON"]
