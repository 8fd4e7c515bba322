from __future__ import annotations

import logging
import time
from dataclasses import dataclass

import numpy as np

from domain.errors import NonFiniteError
from domain.interfaces import SteinKernel, Target
from domain.models import TrainRecord, TrainTrace
from infrastructure.networks import (
    Mlp,
    NoiseLaw,
    RmsPropState,
    clip_weights,
    mlp_backward,
    mlp_forward,
    rmsprop_step,
)
from infrastructure.networks.optim import DEFAULT_DECAY, DEFAULT_EPSILON
from infrastructure.stein import ksd_sample_grad, ksd_u, ksd_v
from metrics import get_metrics_collector

from .training import LoopSettings, TrainingResult, batch_target, log_progress, parameter_norms

METHOD = "ksd-ns"
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KsdConfig:
    iterations: int = 10000
    batch_size: int = 100
    learning_rate: float = 1e-3
    clip: float | None = None
    decay: float = DEFAULT_DECAY
    epsilon: float = DEFAULT_EPSILON
    data_batch_size: int = 100

    def __post_init__(self) -> None:
        if self.iterations < 0:
            raise ValueError(f"iterations must be non-negative, got {self.iterations}")
        if self.batch_size < 2:
            raise ValueError(f"KSD needs a batch of at least 2, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.clip is not None and self.clip <= 0:
            raise ValueError(f"clip must be positive, got {self.clip}")


class TrainKsdSampler:
    """Generator training by descent on the KSD U-statistic of its own samples."""

    def __init__(
        self,
        config: KsdConfig,
        target: Target,
        kernel: SteinKernel,
        noise: NoiseLaw,
        loop: LoopSettings | None = None,
    ) -> None:
        self._config = config
        self._target = target
        self._kernel = kernel
        self._noise = noise
        self._loop = loop or LoopSettings()
        self._metrics = get_metrics_collector()

    def execute(
        self,
        generator: Mlp,
        rng: np.random.Generator,
        *,
        optimizer: RmsPropState | None = None,
        start_iteration: int = 0,
        trace: TrainTrace | None = None,
    ) -> TrainingResult:
        """Run until `config.iterations` total iterations (counting those before `start_iteration`)."""
        config = self._config
        optimizer = optimizer or RmsPropState.for_network(generator, config.decay, config.epsilon)
        trace = trace if trace is not None else TrainTrace(method=METHOD)
        iteration = start_iteration
        started = time.perf_counter()

        while iteration < config.iterations:
            if self._loop.stop_requested():
                logger.warning("Stop requested, leaving training loop", extra={"method": METHOD, "iteration": iteration})
                return TrainingResult(generator, optimizer, trace, iteration, rng, interrupted=True)

            noise = self._noise.sample(config.batch_size, rng)
            target = batch_target(self._target, rng, config.data_batch_size)
            samples = mlp_forward(generator, noise)
            kernel = self._kernel.fitted(samples)
            loss = ksd_u(target, kernel, samples).value
            iteration += 1
            if not np.isfinite(loss):
                self._metrics.record_abort(METHOD, "non_finite_loss", iteration)
                raise NonFiniteError(
                    "non-finite KSD loss",
                    diagnostics={"iteration": iteration, "loss": loss, **parameter_norms(generator)},
                    trace=trace,
                )

            sample_grads = ksd_sample_grad(target, kernel, samples)
            param_grads, _ = mlp_backward(generator, noise, sample_grads)
            try:
                generator, optimizer = rmsprop_step(optimizer, generator, param_grads, config.learning_rate)
            except NonFiniteError as exc:
                self._metrics.record_abort(METHOD, "non_finite_gradient", iteration)
                raise NonFiniteError(
                    "non-finite generator gradient",
                    diagnostics={"iteration": iteration, **exc.diagnostics, **parameter_norms(generator)},
                    trace=trace,
                ) from exc
            if config.clip is not None:
                generator = clip_weights(generator, config.clip)

            diagnostic = None
            if self._loop.diagnostic_every > 0 and iteration % self._loop.diagnostic_every == 0:
                diagnostic = ksd_v(target, kernel, samples).value
            bandwidth = getattr(kernel, "bandwidth_sq", None)
            trace.append(
                TrainRecord(
                    iteration=iteration,
                    loss=loss,
                    wall_time=time.perf_counter() - started,
                    bandwidth=bandwidth,
                    ksd_v=diagnostic,
                )
            )
            self._metrics.record_iteration(METHOD, iteration, {"ksd": loss}, bandwidth)
            log_progress(logger, METHOD, iteration, self._loop, loss=loss, bandwidth=bandwidth, ksd_v=diagnostic)

        return TrainingResult(generator, optimizer, trace, iteration, rng)


def train_ksd_ns(
    config: KsdConfig,
    target: Target,
    generator: Mlp,
    kernel: SteinKernel,
    noise: NoiseLaw,
    rng: np.random.Generator,
) -> tuple[Mlp, TrainTrace]:
    result = TrainKsdSampler(config, target, kernel, noise).execute(generator, rng)
    return result.generator, result.trace


__all__ = ["KsdConfig", "TrainKsdSampler", "train_ksd_ns"]
