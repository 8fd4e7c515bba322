from .quality import (
    REPORTED_METRICS,
    aggregate_runs,
    mmd_u,
    mode_coverage,
    moment_ground_truth,
    moment_stats,
    posterior_accuracy,
)

__all__ = [
    "REPORTED_METRICS",
    "aggregate_runs",
    "mmd_u",
    "mode_coverage",
    "moment_ground_truth",
    "moment_stats",
    "posterior_accuracy",
]
