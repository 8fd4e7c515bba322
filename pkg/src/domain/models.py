from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator

import numpy as np
from numpy.typing import NDArray

FloatArray = NDArray[np.float64]


class Estimator(str, Enum):
    U_STATISTIC = "u-statistic"
    V_STATISTIC = "v-statistic"


@dataclass(frozen=True)
class KsdEstimate:
    value: float
    n: int
    estimator: Estimator


@dataclass(frozen=True)
class TrainRecord:
    iteration: int
    loss: float
    wall_time: float
    bandwidth: float | None = None
    # KSD-NS: nonnegative V-statistic diagnostic
    ksd_v: float | None = None
    # Fisher-NS: last discriminator objective and mean ||f_eta||^2
    discriminator_loss: float | None = None
    discriminator_norm: float | None = None


@dataclass
class TrainTrace:
    """Per-iteration training records; iterations are strictly increasing."""

    method: str
    records: list[TrainRecord] = field(default_factory=list)

    def append(self, record: TrainRecord) -> None:
        if self.records and record.iteration <= self.records[-1].iteration:
            raise ValueError(
                f"trace iterations must increase: {record.iteration} after "
                f"{self.records[-1].iteration}"
            )
        self.records.append(record)

    def extend(self, other: TrainTrace) -> None:
        for record in other.records:
            self.append(record)

    @property
    def iterations(self) -> list[int]:
        return [record.iteration for record in self.records]

    @property
    def losses(self) -> FloatArray:
        return np.array([record.loss for record in self.records], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TrainRecord]:
        return iter(self.records)


@dataclass(frozen=True)
class ParticleSet:
    positions: FloatArray
    iteration: int = 0

    @property
    def size(self) -> int:
        return int(self.positions.shape[0])

    @property
    def dim(self) -> int:
        return int(self.positions.shape[1])


@dataclass(frozen=True)
class LabeledDataset:
    features: FloatArray
    labels: FloatArray  # values in {-1, +1}
    train_indices: NDArray[np.int64]
    test_indices: NDArray[np.int64]

    @property
    def num_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def train_features(self) -> FloatArray:
        return self.features[self.train_indices]

    @property
    def train_labels(self) -> FloatArray:
        return self.labels[self.train_indices]

    @property
    def test_features(self) -> FloatArray:
        return self.features[self.test_indices]

    @property
    def test_labels(self) -> FloatArray:
        return self.labels[self.test_indices]


@dataclass(frozen=True)
class RunMetrics:
    """Sample-quality metrics of one seed; absent metrics are None."""

    seed: int
    h1: float | None = None
    h2: float | None = None
    mmd: float | None = None
    mode_coverage: int | None = None
    accuracy: float | None = None

    def as_row(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "h1": self.h1,
            "h2": self.h2,
            "mmd": self.mmd,
            "mode_coverage": self.mode_coverage,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    standard_error: float
    mse: float | None = None


@dataclass(frozen=True)
class MetricReport:
    runs: tuple[RunMetrics, ...]
    summaries: dict[str, MetricSummary]

    @property
    def run_count(self) -> int:
        return len(self.runs)


@dataclass(frozen=True)
class Checkpoint:
    version: int
    layer_dims: tuple[int, ...]
    activation: str
    noise_kind: str
    noise_scale: float
    parameters: FloatArray  # flat, layer order W0, b0, W1, b1, ...
    accumulators: FloatArray | None
    optimizer_decay: float
    optimizer_epsilon: float
    iteration: int
    rng_state: dict[str, Any] | None


__all__ = [
    "FloatArray",
    "Estimator",
    "KsdEstimate",
    "TrainRecord",
    "TrainTrace",
    "ParticleSet",
    "LabeledDataset",
    "RunMetrics",
    "MetricSummary",
    "MetricReport",
    "Checkpoint",
]
