from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from domain.models import FloatArray
from infrastructure.common.registry import NameResolver


class NoiseKind(str, Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


NOISE_KINDS: NameResolver[NoiseKind] = NameResolver(
    {"uniform": NoiseKind.UNIFORM, "gaussian": NoiseKind.GAUSSIAN},
    aliases={"normal": "gaussian"},
    default_key="uniform",
    error_message="Unsupported noise law: {value} (choices: {choices})",
)


@dataclass(frozen=True)
class NoiseLaw:
    """Generator input law: uniform(-scale, scale)^dim or N(0, scale^2 I_dim)."""

    kind: NoiseKind
    scale: float
    dim: int

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ValueError(f"noise scale must be positive, got {self.scale}")
        if self.dim < 1:
            raise ValueError(f"noise dimension must be positive, got {self.dim}")

    def sample(self, n: int, rng: np.random.Generator) -> FloatArray:
        if self.kind is NoiseKind.UNIFORM:
            return rng.uniform(-self.scale, self.scale, size=(n, self.dim))
        return self.scale * rng.standard_normal((n, self.dim))


__all__ = ["NOISE_KINDS", "NoiseKind", "NoiseLaw"]
