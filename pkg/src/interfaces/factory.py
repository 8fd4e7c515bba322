from __future__ import annotations

from typing import Any, Callable

import numpy as np

from application.use_cases.run_experiment import ExperimentComponents
from domain.errors import ConfigError, DatasetError, SamplerError
from domain.experiment import ExperimentConfig, KernelSpec, TargetSpec
from domain.interfaces import SteinKernel, Target
from domain.models import LabeledDataset
from infrastructure.kernels import ImqKernel, RbfKernel
from infrastructure.networks import NOISE_KINDS, NoiseLaw
from infrastructure.storage import load_dataset, make_synthetic_logistic
from infrastructure.targets import Gaussian, GaussianMixture, IsotropicGaussian, LogisticPosterior, crossed_mixture_new, ring8_new

from .experiment_config import ConfigSection, read_floats, read_int, read_positive, read_real

TargetBuild = tuple[Target, LabeledDataset | None]


def _matrix(section: ConfigSection, key: str) -> np.ndarray:
    raw = section.get(key)
    try:
        matrix = np.asarray(raw, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(section.field(key), "must be a matrix of numbers") from exc
    if matrix.ndim != 2:
        raise ConfigError(section.field(key), "must be a list of rows")
    return matrix


def _mean(section: ConfigSection) -> np.ndarray:
    mean = read_floats(section, "mean")
    if mean is not None:
        return np.asarray(mean)
    return np.zeros(read_int(section, "dim", 1, minimum=1))


def _isotropic(section: ConfigSection) -> TargetBuild:
    variance = read_positive(section, "variance", 1.0)
    return IsotropicGaussian(_mean(section), variance), None  # type: ignore[arg-type]


def _gaussian(section: ConfigSection) -> TargetBuild:
    mean = read_floats(section, "mean")
    if mean is None:
        raise ConfigError(section.field("mean"), "is required")
    return Gaussian(np.asarray(mean), _matrix(section, "covariance")), None


def _component(raw: Any, path: str) -> Gaussian | IsotropicGaussian:
    section = ConfigSection(raw, path)
    if "covariance" in section:
        mean = read_floats(section, "mean")
        if mean is None:
            raise ConfigError(section.field("mean"), "is required")
        component: Gaussian | IsotropicGaussian = Gaussian(np.asarray(mean), _matrix(section, "covariance"))
    else:
        component = IsotropicGaussian(_mean(section), read_positive(section, "variance", 1.0))  # type: ignore[arg-type]
    section.finish()
    return component


def _mixture(section: ConfigSection) -> TargetBuild:
    raw_components = section.get("components")
    if not isinstance(raw_components, list) or not raw_components:
        raise ConfigError(section.field("components"), "must be a nonempty list")
    components = [_component(raw, f"{section.field('components')}[{i}]") for i, raw in enumerate(raw_components)]
    weights = read_floats(section, "weights")
    if weights is None:
        weights = tuple(1.0 / len(components) for _ in components)
    return GaussianMixture(weights, components), None


def _ring8(section: ConfigSection) -> TargetBuild:
    radius = read_positive(section, "radius", 15.0)
    component_sd = read_positive(section, "component_sd", 1.0)
    return ring8_new(radius, component_sd), None  # type: ignore[arg-type]


def _crossed(section: ConfigSection) -> TargetBuild:
    correlation = read_real(section, "correlation", 0.8, lambda v: 0 < abs(v) < 1, "in (-1, 1), nonzero")
    ridge_distance = read_positive(section, "ridge_distance", 2.0)
    return crossed_mixture_new(correlation, ridge_distance), None  # type: ignore[arg-type]


def _logistic(section: ConfigSection) -> TargetBuild:
    split_seed = read_int(section, "split_seed", 0, minimum=0)
    path = section.get("dataset")
    if path is not None:
        for key in ("num_data", "num_features", "label_noise", "margin"):
            if key in section:
                raise ConfigError(section.field(key), "only applies to the synthetic dataset")
        dataset = load_dataset(str(path), seed=split_seed)
    else:
        dataset = make_synthetic_logistic(
            read_int(section, "num_data", 5000, minimum=2),
            read_int(section, "num_features", 54, minimum=1),
            seed=split_seed,
            label_noise=read_real(section, "label_noise", 0.1, lambda v: 0 <= v < 0.5, "in [0, 0.5)"),  # type: ignore[arg-type]
            margin=read_real(section, "margin", 0.1, lambda v: v >= 0, "non-negative"),  # type: ignore[arg-type]
        )
    target = LogisticPosterior.from_dataset(
        dataset,
        prior_shape=read_positive(section, "prior_shape", 1.0),  # type: ignore[arg-type]
        prior_rate=read_positive(section, "prior_rate", 0.01),  # type: ignore[arg-type]
    )
    return target, dataset


TARGET_BUILDERS: dict[str, Callable[[ConfigSection], TargetBuild]] = {
    "isotropic-gaussian": _isotropic,
    "gaussian": _gaussian,
    "mixture": _mixture,
    "ring8": _ring8,
    "crossed-mixture": _crossed,
    "logistic-posterior": _logistic,
}


def build_target(spec: TargetSpec) -> TargetBuild:
    """Target (and, for the logistic posterior, its dataset) from the `target` section."""
    builder = TARGET_BUILDERS.get(spec.kind)
    if builder is None:
        raise ConfigError("target.kind", f"unsupported target {spec.kind!r}")
    section = ConfigSection(dict(spec.params), "target")
    try:
        built = builder(section)
    except (ConfigError, DatasetError):
        raise
    except FileNotFoundError as exc:
        raise ConfigError("target.dataset", f"file not found: {exc.filename}") from exc
    except (SamplerError, ValueError) as exc:
        raise ConfigError("target", str(exc)) from exc
    section.finish()
    return built


def build_kernel(spec: KernelSpec) -> SteinKernel:
    """Stein kernel of the `kernel` section."""
    if spec.kind == "rbf":
        return RbfKernel(spec.bandwidth_sq)
    return ImqKernel(spec.c, spec.beta)


def build_components(config: ExperimentConfig) -> ExperimentComponents:
    target, dataset = build_target(config.target)
    if config.init.mean is not None and len(config.init.mean) != target.dim:
        raise ConfigError("init.mean", f"needs {target.dim} entries, got {len(config.init.mean)}")
    if "accuracy" in config.evaluation.metrics and dataset is None:
        raise ConfigError("evaluation.metrics", "accuracy needs a logistic-posterior target")
    noise = NoiseLaw(
        kind=NOISE_KINDS.resolve(config.noise.kind),
        scale=config.noise.scale,
        dim=config.noise.dim if config.noise.dim is not None else target.dim,
    )
    return ExperimentComponents(target=target, kernel=build_kernel(config.kernel), noise=noise, dataset=dataset)


__all__ = ["TARGET_BUILDERS", "build_components", "build_kernel", "build_target"]
