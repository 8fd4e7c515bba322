"""End-to-end experiment: train or move particles per seed, then evaluate and report.

Layout under `output_dir`:

    seed-<s>/checkpoint.bin      generator (neural samplers)
    seed-<s>/discriminator.bin   Fisher-NS only
    seed-<s>/trace.csv
    seed-<s>/samples.csv
    seed-<s>/metrics.csv
    seed-<s>/samples.svg         2-D targets
    report.csv, report.json, metrics.prom
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from config import SETTINGS
from domain.errors import CheckpointError, NonFiniteError, RunInterruptedError
from domain.experiment import ExperimentConfig, Method
from domain.interfaces import SteinKernel, Target
from domain.models import FloatArray, LabeledDataset, MetricReport, RunMetrics, TrainTrace
from infrastructure.common.atomic import atomic_write
from infrastructure.common.serialization import dumps
from infrastructure.evaluation import aggregate_runs, moment_ground_truth
from infrastructure.fisher import FisherConfig
from infrastructure.networks import Activation, Mlp, NoiseLaw, RmsPropState, mlp_forward, mlp_new
from infrastructure.storage import (
    checkpoint_from_network,
    ensure_directory,
    load_checkpoint,
    network_from_checkpoint,
    read_trace,
    restore_rng,
    save_checkpoint,
    write_report,
    write_run_metrics,
    write_samples,
    write_trace,
)
from infrastructure.storage.scatter import render_scatter_svg
from metrics import get_metrics_collector

from .evaluate import EvaluateSamples
from .run_baselines import BaselineConfig, RunParticleBaseline
from .train_fisher import TrainFisherSampler
from .train_ksd import KsdConfig, TrainKsdSampler
from .training import LoopSettings, StopCheck, TrainingResult

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "checkpoint.bin"
DISCRIMINATOR_FILE = "discriminator.bin"
TRACE_FILE = "trace.csv"
SAMPLES_FILE = "samples.csv"
RUN_METRICS_FILE = "metrics.csv"
SCATTER_FILE = "samples.svg"

# independent streams per seed
INIT_STREAM, TRAIN_STREAM, EVAL_STREAM = 0, 1, 2


@dataclass(frozen=True)
class ExperimentComponents:
    """Objects built from the config sections by the interface layer."""

    target: Target
    kernel: SteinKernel
    noise: NoiseLaw
    dataset: LabeledDataset | None = None


def seed_directory(output_dir: str | Path, seed: int) -> Path:
    return Path(output_dir) / f"seed-{seed}"


def generator_dims(config: ExperimentConfig, components: ExperimentComponents) -> tuple[int, ...]:
    return (components.noise.dim, *config.network.hidden, components.target.dim)


def discriminator_dims(config: ExperimentConfig, components: ExperimentComponents) -> tuple[int, ...]:
    hidden = config.network.discriminator_hidden
    if hidden is None:
        hidden = config.network.hidden
    dim = components.target.dim
    return (dim, *hidden, dim)


@dataclass
class _NetworkState:
    generator: Mlp
    optimizer: RmsPropState | None
    rng: np.random.Generator
    iteration: int
    trace: TrainTrace | None
    discriminator: Mlp | None = None
    discriminator_optimizer: RmsPropState | None = None


class RunExperiment:
    def __init__(
        self,
        config: ExperimentConfig,
        components: ExperimentComponents,
        should_stop: StopCheck | None = None,
    ) -> None:
        self._config = config
        self._components = components
        self._loop = LoopSettings(should_stop=should_stop)
        self._metrics = get_metrics_collector()

    def execute(self) -> MetricReport:
        config = self._config
        output = ensure_directory(config.output_dir)
        logger.info(
            "Experiment started",
            extra={"method": config.method.value, "target": config.target.kind, "seeds": list(config.seeds), "output_dir": str(output)},
        )
        runs = [self._run_seed(seed) for seed in config.seeds]

        truth = moment_ground_truth(self._components.target) if "moments" in config.evaluation.metrics else None
        report = aggregate_runs(runs, truth)
        write_report(output / "report.csv", report)
        self._write_json_report(output / "report.json", report, truth)
        if SETTINGS.output.export_metrics_textfile:
            self._metrics.export_textfile(output / "metrics.prom")
        logger.info(
            "Experiment finished",
            extra={"method": config.method.value, "runs": report.run_count, **{name: s.mean for name, s in report.summaries.items()}},
        )
        return report

    def _write_json_report(self, path: Path, report: MetricReport, truth: dict[str, float] | None) -> None:
        payload = {
            "config": self._config.as_dict(),
            "ground_truth": truth,
            "runs": [run.as_row() for run in report.runs],
            "summaries": {
                name: {"mean": s.mean, "standard_error": s.standard_error, "mse": s.mse}
                for name, s in report.summaries.items()
            },
        }
        with atomic_write(path, "wb") as handle:
            handle.write(dumps(payload, pretty=True))

    def _run_seed(self, seed: int) -> RunMetrics:
        config = self._config
        directory = ensure_directory(seed_directory(config.output_dir, seed))
        started = time.perf_counter()
        eval_rng = np.random.default_rng([seed, EVAL_STREAM])
        try:
            if config.method.is_neural:
                samples = self._run_neural(seed, directory, eval_rng)
            else:
                samples = self._run_particles(seed, directory)
        except NonFiniteError as exc:
            if exc.trace is not None:
                write_trace(directory / TRACE_FILE, exc.trace)
            self._metrics.record_run(config.method.value, seed, False, time.perf_counter() - started)
            raise
        except RunInterruptedError:
            self._metrics.record_run(config.method.value, seed, False, time.perf_counter() - started)
            raise

        write_samples(directory / SAMPLES_FILE, samples)
        self._metrics.record_samples(samples.shape[0])
        if samples.shape[1] == 2:
            with atomic_write(directory / SCATTER_FILE) as handle:
                handle.write(render_scatter_svg(samples, config.evaluation.plot_limits))

        run = EvaluateSamples(config.evaluation, self._components.target, self._components.dataset).execute(
            samples, seed, eval_rng
        )
        write_run_metrics(directory / RUN_METRICS_FILE, [run])
        self._metrics.record_run(config.method.value, seed, True, time.perf_counter() - started)
        return run

    # neural samplers

    def _fresh_state(self, seed: int) -> _NetworkState:
        config = self._config
        init_rng = np.random.default_rng([seed, INIT_STREAM])
        generator = mlp_new(generator_dims(config, self._components), config.network.activation, init_rng)
        discriminator = None
        if config.method is Method.FISHER_NS:
            discriminator = mlp_new(discriminator_dims(config, self._components), Activation.TANH, init_rng)
        return _NetworkState(
            generator=generator,
            optimizer=None,
            rng=np.random.default_rng([seed, TRAIN_STREAM]),
            iteration=0,
            trace=None,
            discriminator=discriminator,
        )

    def _resumed_state(self, seed: int, source: Path) -> _NetworkState:
        config = self._config
        checkpoint_path = source / CHECKPOINT_FILE
        checkpoint = load_checkpoint(checkpoint_path)
        generator, optimizer = network_from_checkpoint(checkpoint)
        expected = generator_dims(config, self._components)
        if generator.layer_dims != expected:
            raise CheckpointError(
                str(checkpoint_path), f"network dims {list(generator.layer_dims)} do not match config {list(expected)}"
            )
        trace = read_trace(source / TRACE_FILE, config.method.value)
        trace = TrainTrace(
            method=trace.method, records=[r for r in trace.records if r.iteration <= checkpoint.iteration]
        )
        state = _NetworkState(
            generator=generator,
            optimizer=optimizer,
            rng=restore_rng(checkpoint, fallback_seed=seed),
            iteration=checkpoint.iteration,
            trace=trace,
        )
        if config.method is Method.FISHER_NS:
            discriminator, discriminator_optimizer = network_from_checkpoint(load_checkpoint(source / DISCRIMINATOR_FILE))
            state.discriminator = discriminator
            state.discriminator_optimizer = discriminator_optimizer
        logger.info(
            "Resuming from checkpoint",
            extra={"seed": seed, "path": str(checkpoint_path), "iteration": checkpoint.iteration},
        )
        return state

    def _train(self, state: _NetworkState) -> TrainingResult:
        config = self._config
        schedule = config.schedule
        optimizer = config.optimizer
        components = self._components
        if config.method is Method.KSD_NS:
            ksd = KsdConfig(
                iterations=schedule.iterations,
                batch_size=schedule.batch_size,
                learning_rate=optimizer.learning_rate,
                clip=schedule.clip,
                decay=optimizer.decay,
                epsilon=optimizer.epsilon,
                data_batch_size=schedule.data_batch_size,
            )
            return TrainKsdSampler(ksd, components.target, components.kernel, components.noise, self._loop).execute(
                state.generator,
                state.rng,
                optimizer=state.optimizer,
                start_iteration=state.iteration,
                trace=state.trace,
            )
        fisher = FisherConfig(
            lam=schedule.lam,
            discriminator_steps=schedule.discriminator_steps,
            learning_rate=optimizer.learning_rate,
            discriminator_learning_rate=optimizer.discriminator_learning_rate,
            batch_size=schedule.batch_size,
            iterations=schedule.iterations,
            discriminator_clip=schedule.discriminator_clip,
            clip=schedule.clip,
            decay=optimizer.decay,
            epsilon=optimizer.epsilon,
            data_batch_size=schedule.data_batch_size,
        )
        assert state.discriminator is not None
        return TrainFisherSampler(fisher, components.target, components.noise, self._loop).execute(
            state.generator,
            state.discriminator,
            state.rng,
            optimizer=state.optimizer,
            discriminator_optimizer=state.discriminator_optimizer,
            start_iteration=state.iteration,
            trace=state.trace,
        )

    def _save_networks(self, directory: Path, result: TrainingResult) -> None:
        noise = self._components.noise
        save_checkpoint(
            directory / CHECKPOINT_FILE,
            checkpoint_from_network(
                result.generator,
                noise_kind=noise.kind.value,
                noise_scale=noise.scale,
                iteration=result.iteration,
                optimizer=result.optimizer,
                rng=result.rng,
            ),
        )
        if result.discriminator is not None:
            save_checkpoint(
                directory / DISCRIMINATOR_FILE,
                checkpoint_from_network(
                    result.discriminator,
                    noise_kind=noise.kind.value,
                    noise_scale=noise.scale,
                    iteration=result.iteration,
                    optimizer=result.discriminator_optimizer,
                ),
            )

    def _run_neural(self, seed: int, directory: Path, eval_rng: np.random.Generator) -> FloatArray:
        config = self._config
        if config.resume_from is not None:
            state = self._resumed_state(seed, seed_directory(config.resume_from, seed))
        else:
            state = self._fresh_state(seed)
        result = self._train(state)
        self._save_networks(directory, result)
        write_trace(directory / TRACE_FILE, result.trace)
        if result.interrupted:
            raise RunInterruptedError(f"seed {seed} interrupted", iteration=result.iteration)

        noise = self._components.noise.sample(config.evaluation.sample_size, eval_rng)
        return mlp_forward(result.generator, noise)

    # particle baselines

    def _run_particles(self, seed: int, directory: Path) -> FloatArray:
        config = self._config
        target = self._components.target
        init_rng = np.random.default_rng([seed, INIT_STREAM])
        center = np.zeros(target.dim) if config.init.mean is None else np.asarray(config.init.mean, dtype=np.float64)
        initial = center + config.init.sd * init_rng.standard_normal((config.evaluation.sample_size, target.dim))

        schedule = config.schedule
        baseline = BaselineConfig(
            iterations=schedule.iterations,
            svgd_step=schedule.svgd_step,
            sgld_base_step=schedule.sgld_base_step,
            sgld_decay=schedule.sgld_decay,
            data_batch_size=schedule.data_batch_size,
        )
        kernel = self._components.kernel if config.method is Method.SVGD else None
        result = RunParticleBaseline(config.method, baseline, target, kernel, self._loop).execute(
            initial, np.random.default_rng([seed, TRAIN_STREAM])
        )
        write_trace(directory / TRACE_FILE, result.trace)
        if result.interrupted:
            raise RunInterruptedError(f"seed {seed} interrupted", iteration=result.particles.iteration)
        return result.particles.positions


__all__ = [
    "EVAL_STREAM",
    "ExperimentComponents",
    "RunExperiment",
    "discriminator_dims",
    "generator_dims",
    "seed_directory",
]
