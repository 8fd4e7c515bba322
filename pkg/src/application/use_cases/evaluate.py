from __future__ import annotations

import logging

import numpy as np

from domain.experiment import EvalSpec
from domain.interfaces import Target
from domain.models import FloatArray, LabeledDataset, RunMetrics
from infrastructure.evaluation import mmd_u, mode_coverage, moment_stats, posterior_accuracy

logger = logging.getLogger(__name__)

METRIC_NAMES = ("moments", "mmd", "mode_coverage", "accuracy")


class EvaluateSamples:
    """Sample-quality metrics of one run; a requested metric the target cannot support is skipped."""

    def __init__(self, spec: EvalSpec, target: Target, dataset: LabeledDataset | None = None) -> None:
        self._spec = spec
        self._target = target
        self._dataset = dataset

    def _skip(self, metric: str, reason: str) -> None:
        logger.warning("Metric skipped", extra={"metric": metric, "reason": reason})

    def execute(self, samples: FloatArray, seed: int, rng: np.random.Generator) -> RunMetrics:
        spec = self._spec
        target = self._target
        values: dict[str, float | int | None] = {}

        if "moments" in spec.metrics:
            if samples.shape[1] == 2:
                values["h1"], values["h2"] = moment_stats(samples)
            else:
                self._skip("moments", f"defined for 2-D samples, got d={samples.shape[1]}")

        if "mmd" in spec.metrics:
            if target.can_sample:
                reference = target.sample(spec.reference_size, rng)
                values["mmd"] = mmd_u(samples, reference)
            else:
                self._skip("mmd", "target has no exact sampler")

        if "mode_coverage" in spec.metrics:
            modes = target.modes
            if modes:
                values["mode_coverage"] = mode_coverage(samples, modes, spec.mode_radius)
            else:
                self._skip("mode_coverage", "target declares no modes")

        if "accuracy" in spec.metrics:
            if self._dataset is not None:
                weights = samples[: spec.posterior_samples]
                values["accuracy"] = posterior_accuracy(
                    weights, self._dataset.test_features, self._dataset.test_labels
                )
            else:
                self._skip("accuracy", "no labelled test set")

        metrics = RunMetrics(seed=seed, **values)  # type: ignore[arg-type]
        logger.info("Run evaluated", extra={"seed": seed, **{k: v for k, v in values.items() if v is not None}})
        return metrics


__all__ = ["EvaluateSamples", "METRIC_NAMES"]
