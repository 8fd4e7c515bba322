from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from domain.errors import NonFiniteError
from domain.experiment import Method
from domain.interfaces import SteinKernel, Target
from domain.models import FloatArray, ParticleSet, TrainRecord, TrainTrace
from infrastructure.baselines import (
    SGLD_DEFAULT_BASE,
    SGLD_DEFAULT_DECAY,
    SVGD_DEFAULT_STEP,
    sgld_step,
    svgd_step,
)
from metrics import get_metrics_collector

from .training import LoopSettings, batch_target, log_progress

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BaselineConfig:
    iterations: int = 10000
    svgd_step: float = SVGD_DEFAULT_STEP
    sgld_base_step: float = SGLD_DEFAULT_BASE
    sgld_decay: float = SGLD_DEFAULT_DECAY
    data_batch_size: int = 100

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError(f"iterations must be non-negative, got {self.iterations}")
        if self.svgd_step <= 0:
            raise ValueError(f"svgd_step must be positive, got {self.svgd_step}")
        if self.sgld_base_step <= 0:
            raise ValueError(f"sgld_base_step must be positive, got {self.sgld_base_step}")


@dataclass
class BaselineResult:
    particles: ParticleSet
    trace: TrainTrace
    interrupted: bool = False


class RunParticleBaseline:
    """SVGD particles or independent SGLD chains moved for a fixed number of steps.

    The trace holds -mean log q of the particles (full target) every
    `diagnostic_every` steps and at the last one.
    """

    def __init__(
        self,
        method: Method,
        config: BaselineConfig,
        target: Target,
        kernel: SteinKernel | None = None,
        loop: LoopSettings | None = None,
    ) -> None:
        if method not in (Method.SVGD, Method.SGLD):
            raise ValueError(f"{method.value} is not a particle baseline")
        if method is Method.SVGD and kernel is None:
            raise ValueError("SVGD needs a kernel")
        self._method = method
        self._config = config
        self._target = target
        self._kernel = kernel
        self._loop = loop or LoopSettings()
        self._metrics = get_metrics_collector()

    def _move(self, particles: ParticleSet, rng: np.random.Generator) -> ParticleSet:
        target = batch_target(self._target, rng, self._config.data_batch_size)
        if self._method is Method.SVGD:
            assert self._kernel is not None
            return svgd_step(target, self._kernel, particles, self._config.svgd_step)
        moved = sgld_step(
            target,
            particles.positions,
            particles.iteration,
            rng,
            base=self._config.sgld_base_step,
            decay=self._config.sgld_decay,
        )
        return ParticleSet(positions=moved, iteration=particles.iteration + 1)

    def execute(self, initial: FloatArray, rng: np.random.Generator) -> BaselineResult:
        method = self._method.value
        particles = ParticleSet(positions=np.array(initial, dtype=np.float64), iteration=0)
        trace = TrainTrace(method=method)
        started = time.perf_counter()
        every = self._loop.diagnostic_every

        while particles.iteration < self._config.iterations:
            if self._loop.stop_requested():
                logger.warning("Stop requested, leaving particle loop", extra={"method": method, "iteration": particles.iteration})
                return BaselineResult(particles, trace, interrupted=True)
            try:
                particles = self._move(particles, rng)
            except NonFiniteError as exc:
                self._metrics.record_abort(method, "non_finite_update", particles.iteration + 1)
                raise NonFiniteError(
                    f"non-finite {method} update",
                    diagnostics={"iteration": particles.iteration + 1, **exc.diagnostics},
                    trace=trace,
                ) from exc

            iteration = particles.iteration
            if (every > 0 and iteration % every == 0) or iteration == self._config.iterations:
                loss = -float(np.mean(self._target.log_density_unnorm(particles.positions)))
                trace.append(TrainRecord(iteration=iteration, loss=loss, wall_time=time.perf_counter() - started))
                self._metrics.record_iteration(method, iteration, {"neg_log_density": loss})
                log_progress(logger, method, iteration, self._loop, loss=loss)

        return BaselineResult(particles, trace)


def run_svgd(
    target: Target,
    kernel: SteinKernel,
    initial: FloatArray,
    iterations: int,
    rng: np.random.Generator,
    step_size: float = SVGD_DEFAULT_STEP,
) -> tuple[ParticleSet, TrainTrace]:
    config = BaselineConfig(iterations=iterations, svgd_step=step_size)
    result = RunParticleBaseline(Method.SVGD, config, target, kernel).execute(initial, rng)
    return result.particles, result.trace


def run_sgld(
    target: Target,
    initial: FloatArray,
    iterations: int,
    rng: np.random.Generator,
    *,
    base: float = SGLD_DEFAULT_BASE,
    decay: float = SGLD_DEFAULT_DECAY,
) -> tuple[ParticleSet, TrainTrace]:
    config = BaselineConfig(iterations=iterations, sgld_base_step=base, sgld_decay=decay)
    result = RunParticleBaseline(Method.SGLD, config, target).execute(initial, rng)
    return result.particles, result.trace


__all__ = ["BaselineConfig", "BaselineResult", "RunParticleBaseline", "run_sgld", "run_svgd"]
