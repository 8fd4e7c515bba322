"""Typed description of one training/evaluation experiment."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Mapping


class Method(str, Enum):
    KSD_NS = "ksd-ns"
    FISHER_NS = "fisher-ns"
    SVGD = "svgd"
    SGLD = "sgld"

    @property
    def is_neural(self) -> bool:
        return self in (Method.KSD_NS, Method.FISHER_NS)


@dataclass(frozen=True)
class TargetSpec:
    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class NetworkSpec:
    hidden: tuple[int, ...] = (200, 200)
    activation: str = "tanh"
    # None: same structure as the generator
    discriminator_hidden: tuple[int, ...] | None = None


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "imq"
    c: float = 1.0
    beta: float = -0.5
    # None: median heuristic recomputed on every batch
    bandwidth_sq: float | None = None


@dataclass(frozen=True)
class OptimizerSpec:
    learning_rate: float = 1e-3
    discriminator_learning_rate: float = 1e-3
    decay: float = 0.9
    epsilon: float = 1e-8


@dataclass(frozen=True)
class ScheduleSpec:
    iterations: int = 10000
    batch_size: int = 100
    discriminator_steps: int = 5
    lam: float = 0.5
    clip: float | None = None
    discriminator_clip: float | None = None
    svgd_step: float = 0.3
    sgld_base_step: float = 0.1
    sgld_decay: float = 0.55
    data_batch_size: int = 100


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "uniform"
    scale: float = 10.0
    # None: noise dimension equals the target dimension
    dim: int | None = None


@dataclass(frozen=True)
class InitSpec:
    """Starting law N(mean, sd^2 I) of SVGD particles and SGLD chains."""

    mean: tuple[float, ...] | None = None
    sd: float = 1.0


@dataclass(frozen=True)
class EvalSpec:
    metrics: tuple[str, ...] = ("moments", "mmd", "mode_coverage")
    sample_size: int = 1000
    reference_size: int = 1000
    mode_radius: float = 3.0
    posterior_samples: int = 100
    plot_limits: tuple[float, float, float, float] | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    method: Method
    target: TargetSpec
    seeds: tuple[int, ...]
    output_dir: str
    network: NetworkSpec = field(default_factory=NetworkSpec)
    kernel: KernelSpec = field(default_factory=KernelSpec)
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    schedule: ScheduleSpec = field(default_factory=ScheduleSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    init: InitSpec = field(default_factory=InitSpec)
    evaluation: EvalSpec = field(default_factory=EvalSpec)
    resume_from: str | None = None

    def as_dict(self) -> dict[str, Any]:
        payload = asdict(self)
        payload["method"] = self.method.value
        payload["target"]["params"] = dict(self.target.params)
        return payload


__all__ = [
    "Method",
    "TargetSpec",
    "NetworkSpec",
    "KernelSpec",
    "OptimizerSpec",
    "ScheduleSpec",
    "NoiseSpec",
    "InitSpec",
    "EvalSpec",
    "ExperimentConfig",
]
