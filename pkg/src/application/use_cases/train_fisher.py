from __future__ import annotations

import logging
import time
from collections.abc import Callable

import numpy as np

from domain.errors import NonFiniteError
from domain.interfaces import Target
from domain.models import FloatArray, TrainRecord, TrainTrace
from infrastructure.fisher import FisherConfig, FisherGradients, discriminator_ascent_step, fisher_gradients
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
from metrics import get_metrics_collector

from .training import LoopSettings, TrainingResult, batch_target, log_progress, parameter_norms

METHOD = "fisher-ns"
logger = logging.getLogger(__name__)

# (n, rng) -> n x d batch from the law the discriminator is fitted against
BatchSampler = Callable[[int, np.random.Generator], FloatArray]


def fit_discriminator(
    target: Target,
    discriminator: Mlp,
    sampler: BatchSampler,
    *,
    lam: float,
    steps: int,
    learning_rate: float,
    batch_size: int,
    rng: np.random.Generator,
    optimizer: RmsPropState | None = None,
    clip: float | None = None,
) -> tuple[Mlp, RmsPropState, list[float]]:
    """Ascent on the Fisher objective in the discriminator alone, a fresh batch per step.

    Returns the fitted network, its optimizer state and the loss seen before each step.
    """
    if steps < 0:
        raise ValueError(f"steps must be non-negative, got {steps}")
    optimizer = optimizer or RmsPropState.for_network(discriminator, DEFAULT_DECAY, DEFAULT_EPSILON)
    losses: list[float] = []
    for step in range(steps):
        X = sampler(batch_size, rng)
        discriminator, optimizer, gradients = discriminator_ascent_step(
            target, discriminator, optimizer, X, lam=lam, learning_rate=learning_rate, clip=clip
        )
        losses.append(gradients.loss)
        if step % 500 == 0:
            logger.debug("Discriminator fit", extra={"step": step, "loss": gradients.loss, "norm": gradients.norm})
    return discriminator, optimizer, losses


class TrainFisherSampler:
    """Alternating ascent on the discriminator and descent on the generator."""

    def __init__(
        self,
        config: FisherConfig,
        target: Target,
        noise: NoiseLaw,
        loop: LoopSettings | None = None,
    ) -> None:
        self._config = config
        self._target = target
        self._noise = noise
        self._loop = loop or LoopSettings()
        self._metrics = get_metrics_collector()

    def _abort(self, reason: str, exc: NonFiniteError, trace: TrainTrace, iteration: int, generator: Mlp) -> NonFiniteError:
        self._metrics.record_abort(METHOD, reason, iteration)
        return NonFiniteError(
            f"non-finite value during Fisher training ({reason})",
            diagnostics={"iteration": iteration, **exc.diagnostics, **parameter_norms(generator)},
            trace=trace,
        )

    def execute(
        self,
        generator: Mlp,
        discriminator: Mlp,
        rng: np.random.Generator,
        *,
        optimizer: RmsPropState | None = None,
        discriminator_optimizer: RmsPropState | None = None,
        start_iteration: int = 0,
        trace: TrainTrace | None = None,
    ) -> TrainingResult:
        config = self._config
        optimizer = optimizer or RmsPropState.for_network(generator, config.decay, config.epsilon)
        discriminator_optimizer = discriminator_optimizer or RmsPropState.for_network(
            discriminator, config.decay, config.epsilon
        )
        trace = trace if trace is not None else TrainTrace(method=METHOD)
        iteration = start_iteration
        started = time.perf_counter()

        def result(interrupted: bool = False) -> TrainingResult:
            return TrainingResult(
                generator,
                optimizer,
                trace,
                iteration,
                rng,
                interrupted=interrupted,
                discriminator=discriminator,
                discriminator_optimizer=discriminator_optimizer,
            )

        while iteration < config.iterations:
            if self._loop.stop_requested():
                logger.warning("Stop requested, leaving training loop", extra={"method": METHOD, "iteration": iteration})
                return result(interrupted=True)

            noise = self._noise.sample(config.batch_size, rng)
            target = batch_target(self._target, rng, config.data_batch_size)
            samples = mlp_forward(generator, noise)
            iteration += 1

            ascent: FisherGradients | None = None
            try:
                for _ in range(config.discriminator_steps):
                    discriminator, discriminator_optimizer, ascent = discriminator_ascent_step(
                        target,
                        discriminator,
                        discriminator_optimizer,
                        samples,
                        lam=config.lam,
                        learning_rate=config.discriminator_learning_rate,
                        clip=config.discriminator_clip,
                    )
                gradients = fisher_gradients(target, discriminator, samples, config.lam)
            except NonFiniteError as exc:
                raise self._abort("non_finite_loss", exc, trace, iteration, generator) from exc

            param_grads, _ = mlp_backward(generator, noise, gradients.sample_grads)
            try:
                generator, optimizer = rmsprop_step(optimizer, generator, param_grads, config.learning_rate)
            except NonFiniteError as exc:
                raise self._abort("non_finite_gradient", exc, trace, iteration, generator) from exc
            if config.clip is not None:
                generator = clip_weights(generator, config.clip)

            discriminator_loss = ascent.loss if ascent is not None else None
            trace.append(
                TrainRecord(
                    iteration=iteration,
                    loss=gradients.loss,
                    wall_time=time.perf_counter() - started,
                    discriminator_loss=discriminator_loss,
                    discriminator_norm=gradients.norm,
                )
            )
            losses = {"fisher": gradients.loss}
            if discriminator_loss is not None:
                losses["discriminator"] = discriminator_loss
            self._metrics.record_iteration(METHOD, iteration, losses)
            log_progress(
                logger,
                METHOD,
                iteration,
                self._loop,
                loss=gradients.loss,
                discriminator_loss=discriminator_loss,
                discriminator_norm=gradients.norm,
            )

        return result()


def train_fisher_ns(
    config: FisherConfig,
    target: Target,
    generator: Mlp,
    discriminator: Mlp,
    noise: NoiseLaw,
    rng: np.random.Generator,
) -> tuple[Mlp, Mlp, TrainTrace]:
    result = TrainFisherSampler(config, target, noise).execute(generator, discriminator, rng)
    assert result.discriminator is not None
    return result.generator, result.discriminator, result.trace


__all__ = ["BatchSampler", "TrainFisherSampler", "fit_discriminator", "train_fisher_ns"]
