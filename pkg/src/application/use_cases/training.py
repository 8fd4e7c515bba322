"""Pieces shared by the neural-sampler training loops."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from config import SETTINGS
from domain.interfaces import SupportsMinibatch, Target
from domain.models import TrainTrace
from infrastructure.networks import Mlp, RmsPropState

StopCheck = Callable[[], bool]


@dataclass(frozen=True)
class LoopSettings:
    """Logging cadence and early-stop hook of a training loop."""

    log_every: int = field(default_factory=lambda: SETTINGS.training.log_every)
    diagnostic_every: int = field(default_factory=lambda: SETTINGS.training.diagnostic_every)
    should_stop: StopCheck | None = None

    def stop_requested(self) -> bool:
        return self.should_stop is not None and self.should_stop()


@dataclass
class TrainingResult:
    generator: Mlp
    optimizer: RmsPropState
    trace: TrainTrace
    iteration: int
    rng: np.random.Generator
    interrupted: bool = False
    discriminator: Mlp | None = None
    discriminator_optimizer: RmsPropState | None = None


def batch_target(
    target: Target, rng: np.random.Generator, data_batch_size: int
) -> Target:
    """Minibatch view of data-indexed targets; every other target is returned as is."""
    if isinstance(target, SupportsMinibatch) and data_batch_size < target.num_data:
        indices = rng.choice(target.num_data, size=data_batch_size, replace=False)
        return target.minibatch(indices)
    return target


def parameter_norms(mlp: Mlp) -> dict[str, float]:
    return {f"layer{index}_weight_norm": float(np.linalg.norm(w)) for index, w in enumerate(mlp.weights)}


def log_progress(logger: logging.Logger, method: str, iteration: int, loop: LoopSettings, **fields: float | None) -> None:
    payload = {"method": method, "iteration": iteration, **fields}
    if loop.log_every > 0 and iteration % loop.log_every == 0:
        logger.info("Training progress", extra=payload)
    else:
        logger.debug("Training step", extra=payload)


__all__ = ["LoopSettings", "StopCheck", "TrainingResult", "batch_target", "log_progress", "parameter_norms"]
