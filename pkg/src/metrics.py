"""Metrics collection for training runs.

Provides both structured logging metrics and Prometheus-compatible metrics. Runs
are batch jobs, so the registry is exported as a node-exporter text file rather
than served.
"""

from __future__ import annotations

import logging
import os

from prometheus_client import REGISTRY, Counter, Gauge, Histogram, Info, write_to_textfile

# Prometheus metrics
ITERATIONS = Counter(
    "sampler_iterations_total",
    "Total number of training iterations or particle steps",
    ["method"],
)

LOSS = Gauge(
    "sampler_loss",
    "Most recent value of a training loss",
    ["method", "loss"],
)

BANDWIDTH = Gauge(
    "sampler_bandwidth",
    "Most recent squared kernel bandwidth",
    ["method"],
)

ABORTS = Counter(
    "sampler_aborts_total",
    "Training runs stopped before completion",
    ["method", "reason"],
)

SAMPLES_GENERATED = Counter(
    "sampler_samples_generated_total",
    "Total number of samples written to disk",
)

RUNS = Counter(
    "sampler_runs_total",
    "Completed seed runs by outcome",
    ["method", "status"],
)

RUN_DURATION = Histogram(
    "sampler_run_duration_seconds",
    "Wall time of one seed run",
    ["method"],
    buckets=(1.0, 5.0, 15.0, 60.0, 300.0, 900.0, 1800.0, 3600.0),
)

SAMPLER_INFO = Info(
    "sampler_build",
    "Sampler build information",
)

# Set build info
SAMPLER_INFO.info({"version": "0.1.0", "architecture": "clean"})


class MetricsCollector:
    """Updates the Prometheus series and mirrors them as structured log lines."""

    def __init__(self) -> None:
        self._logger = logging.getLogger(__name__)

    def record_iteration(
        self,
        method: str,
        iteration: int,
        losses: dict[str, float],
        bandwidth: float | None = None,
    ) -> None:
        """Record one training iteration and its loss values."""
        ITERATIONS.labels(method=method).inc()
        for name, value in losses.items():
            LOSS.labels(method=method, loss=name).set(value)
        if bandwidth is not None:
            BANDWIDTH.labels(method=method).set(bandwidth)

        self._logger.debug(
            "Iteration recorded",
            extra={"method": method, "iteration": iteration, **losses},
        )

    def record_abort(self, method: str, reason: str, iteration: int | None = None) -> None:
        """Record a training run that stopped early."""
        ABORTS.labels(method=method, reason=reason).inc()

        self._logger.error(
            f"Training aborted: {reason}",
            extra={"method": method, "reason": reason, "iteration": iteration},
        )

    def record_samples(self, count: int) -> None:
        SAMPLES_GENERATED.inc(count)

    def record_run(self, method: str, seed: int, success: bool, duration_seconds: float) -> None:
        """Record the outcome of one seed."""
        status = "success" if success else "failure"
        RUNS.labels(method=method, status=status).inc()
        RUN_DURATION.labels(method=method).observe(duration_seconds)

        self._logger.info(
            f"Run {status}",
            extra={"method": method, "seed": seed, "duration_s": round(duration_seconds, 3)},
        )

    def export_textfile(self, path: str | os.PathLike[str]) -> None:
        """Write the default registry in the Prometheus text format."""
        write_to_textfile(str(path), REGISTRY)
        self._logger.debug("Metrics exported", extra={"path": str(path)})


# Global metrics collector instance
_metrics_collector: MetricsCollector | None = None


def get_metrics_collector() -> MetricsCollector:
    """Get or create the global metrics collector instance."""
    global _metrics_collector
    if _metrics_collector is None:
        _metrics_collector = MetricsCollector()
    return _metrics_collector


__all__ = [
    "MetricsCollector",
    "get_metrics_collector",
]
