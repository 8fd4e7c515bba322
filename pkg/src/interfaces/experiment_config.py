"""YAML experiment files mapped onto `ExperimentConfig`.

Every section is optional except `method`, `target` and `seeds`; unknown keys are
rejected with their dotted path so typos never silently fall back to defaults.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Callable, Mapping, TypeVar

import yaml

from config import SETTINGS
from domain.errors import ConfigError
from domain.experiment import (
    EvalSpec,
    ExperimentConfig,
    InitSpec,
    KernelSpec,
    Method,
    NetworkSpec,
    NoiseSpec,
    OptimizerSpec,
    ScheduleSpec,
    TargetSpec,
)
from infrastructure.common.registry import NameResolver
from infrastructure.networks import ACTIVATIONS, NOISE_KINDS

T = TypeVar("T")

METHODS: NameResolver[Method] = NameResolver(
    {method.value: method for method in Method},
    aliases={"ksd": "ksd-ns", "fisher": "fisher-ns", "langevin": "sgld", "ld": "sgld"},
    error_message="Unsupported method: {value} (choices: {choices})",
)

KERNELS: NameResolver[str] = NameResolver(
    {"imq": "imq", "rbf": "rbf"},
    aliases={"gaussian": "rbf", "inverse-multiquadric": "imq"},
    default_key="imq",
    error_message="Unsupported kernel: {value} (choices: {choices})",
)

TARGET_KINDS: NameResolver[str] = NameResolver(
    {
        "isotropic-gaussian": "isotropic-gaussian",
        "gaussian": "gaussian",
        "mixture": "mixture",
        "ring8": "ring8",
        "crossed-mixture": "crossed-mixture",
        "logistic-posterior": "logistic-posterior",
    },
    aliases={
        "normal": "isotropic-gaussian",
        "mvn": "gaussian",
        "gmm": "mixture",
        "ring": "ring8",
        "ring-of-8": "ring8",
        "crossed": "crossed-mixture",
        "logistic": "logistic-posterior",
        "blr": "logistic-posterior",
    },
    error_message="Unsupported target: {value} (choices: {choices})",
)

EVAL_METRICS = ("moments", "mmd", "mode_coverage", "accuracy")
# weight clipping switched on for KSD-NS under the Gaussian kernel unless configured
RBF_DEFAULT_CLIP = 10.0

# schedule keys that only make sense for some methods
_METHOD_ONLY = {
    "lam": {Method.FISHER_NS},
    "discriminator_steps": {Method.FISHER_NS},
    "discriminator_clip": {Method.FISHER_NS},
    "svgd_step": {Method.SVGD},
    "sgld_base_step": {Method.SGLD},
    "sgld_decay": {Method.SGLD},
}


class ConfigSection:
    """Mapping view that remembers which keys were read."""

    def __init__(self, raw: Any, path: str) -> None:
        if raw is None:
            raw = {}
        if not isinstance(raw, Mapping):
            raise ConfigError(path or "<root>", f"expected a mapping, got {type(raw).__name__}")
        self.raw = dict(raw)
        self.path = path
        self._seen: set[str] = set()

    def field(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def __contains__(self, key: str) -> bool:
        return key in self.raw

    def get(self, key: str, default: Any = None) -> Any:
        self._seen.add(key)
        return self.raw.get(key, default)

    def require(self, key: str) -> Any:
        self._seen.add(key)
        if key not in self.raw or self.raw[key] is None:
            raise ConfigError(self.field(key), "is required")
        return self.raw[key]

    def section(self, key: str) -> ConfigSection:
        return ConfigSection(self.get(key), self.field(key))

    def finish(self) -> None:
        unknown = sorted(set(self.raw) - self._seen)
        if unknown:
            raise ConfigError(self.field(unknown[0]), "unknown key")


def _convert(value: Any, field: str, kind: Callable[[Any], T], label: str) -> T:
    if isinstance(value, bool) or value is None:
        raise ConfigError(field, f"must be {label}")
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(field, f"must be {label}, got {value!r}") from exc


def read_int(section: ConfigSection, key: str, default: int, minimum: int | None = None) -> int:
    raw = section.get(key, default)
    if isinstance(raw, float) and not raw.is_integer():
        raise ConfigError(section.field(key), f"must be an integer, got {raw!r}")
    value = _convert(raw, section.field(key), int, "an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(section.field(key), f"must be at least {minimum}, got {value}")
    return value


def read_real(
    section: ConfigSection,
    key: str,
    default: float | None,
    check: Callable[[float], bool] = lambda _: True,
    rule: str = "",
    *,
    nullable: bool = False,
) -> float | None:
    raw = section.get(key, default)
    if raw is None:
        if nullable:
            return None
        raise ConfigError(section.field(key), "is required")
    value = _convert(raw, section.field(key), float, "a number")
    if not check(value):
        raise ConfigError(section.field(key), f"must be {rule}, got {value}")
    return value


def read_positive(section: ConfigSection, key: str, default: float | None, *, nullable: bool = False) -> float | None:
    return read_real(section, key, default, lambda v: v > 0, "positive", nullable=nullable)


def _int_tuple(section: ConfigSection, key: str, default: tuple[int, ...] | None) -> tuple[int, ...] | None:
    raw = section.get(key, default)
    if raw is None:
        return None
    if not isinstance(raw, (list, tuple)):
        raise ConfigError(section.field(key), "must be a list of integers")
    values = tuple(_convert(v, section.field(key), int, "a list of integers") for v in raw)
    if any(v < 1 for v in values):
        raise ConfigError(section.field(key), "entries must be positive")
    return values


def read_floats(section: ConfigSection, key: str, length: int | None = None) -> tuple[float, ...] | None:
    raw = section.get(key)
    if raw is None:
        return None
    if not isinstance(raw, (list, tuple)):
        raise ConfigError(section.field(key), "must be a list of numbers")
    values = tuple(_convert(v, section.field(key), float, "a list of numbers") for v in raw)
    if length is not None and len(values) != length:
        raise ConfigError(section.field(key), f"must have {length} entries, got {len(values)}")
    return values


def _resolve(resolver: NameResolver[T], value: Any, field: str) -> T:
    try:
        return resolver.resolve(None if value is None else str(value))
    except ValueError as exc:
        raise ConfigError(field, str(exc)) from exc


def _parse_target(section: ConfigSection) -> TargetSpec:
    kind = _resolve(TARGET_KINDS, section.require("kind"), section.field("kind"))
    params = {key: value for key, value in section.raw.items() if key != "kind"}
    for key in params:
        section.get(key)
    return TargetSpec(kind=kind, params=params)


def _parse_seeds(root: ConfigSection) -> tuple[int, ...]:
    raw = root.require("seeds")
    if isinstance(raw, int) and not isinstance(raw, bool):
        raw = [raw]
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ConfigError("seeds", "must be a nonempty list of integers")
    seeds = tuple(_convert(v, "seeds", int, "a list of integers") for v in raw)
    if any(seed < 0 for seed in seeds):
        raise ConfigError("seeds", "seeds must be non-negative")
    if len(set(seeds)) != len(seeds):
        raise ConfigError("seeds", "seeds must be distinct")
    return seeds


def _parse_schedule(section: ConfigSection, method: Method, kernel: KernelSpec) -> ScheduleSpec:
    for key, methods in _METHOD_ONLY.items():
        if key in section and method not in methods:
            allowed = ", ".join(sorted(m.value for m in methods))
            raise ConfigError(section.field(key), f"only applies to {allowed}")
    defaults = ScheduleSpec()
    clip_default = defaults.clip
    if method is Method.KSD_NS and kernel.kind == "rbf" and "clip" not in section:
        clip_default = RBF_DEFAULT_CLIP
    schedule = ScheduleSpec(
        iterations=read_int(section, "iterations", defaults.iterations, minimum=0),
        batch_size=read_int(section, "batch_size", defaults.batch_size, minimum=2 if method is Method.KSD_NS else 1),
        discriminator_steps=read_int(section, "discriminator_steps", defaults.discriminator_steps, minimum=1),
        lam=read_positive(section, "lam", defaults.lam),  # type: ignore[arg-type]
        clip=read_positive(section, "clip", clip_default, nullable=True),
        discriminator_clip=read_positive(section, "discriminator_clip", defaults.discriminator_clip, nullable=True),
        svgd_step=read_positive(section, "svgd_step", defaults.svgd_step),  # type: ignore[arg-type]
        sgld_base_step=read_positive(section, "sgld_base_step", defaults.sgld_base_step),  # type: ignore[arg-type]
        sgld_decay=read_real(section, "sgld_decay", defaults.sgld_decay, lambda v: 0 < v <= 1, "in (0, 1]"),  # type: ignore[arg-type]
        data_batch_size=read_int(section, "data_batch_size", defaults.data_batch_size, minimum=1),
    )
    if method in (Method.SVGD, Method.SGLD) and "clip" in section:
        raise ConfigError(section.field("clip"), "only applies to neural samplers")
    return schedule


def _parse_kernel(section: ConfigSection, method: Method) -> KernelSpec:
    defaults = KernelSpec()
    # SVGD runs under the Gaussian kernel unless told otherwise
    fallback = "rbf" if method is Method.SVGD else None
    kind = _resolve(KERNELS, section.get("kind", fallback), section.field("kind"))
    if kind == "imq":
        for key in ("bandwidth_sq",):
            if section.raw.get(key) is not None:
                raise ConfigError(section.field(key), "only applies to the rbf kernel")
    elif any(key in section for key in ("c", "beta")):
        key = "c" if "c" in section else "beta"
        raise ConfigError(section.field(key), "only applies to the imq kernel")
    return KernelSpec(
        kind=kind,
        c=read_positive(section, "c", defaults.c),  # type: ignore[arg-type]
        beta=read_real(section, "beta", defaults.beta, lambda v: -1 < v < 0, "in (-1, 0)"),  # type: ignore[arg-type]
        bandwidth_sq=read_positive(section, "bandwidth_sq", None, nullable=True),
    )


def _parse_network(section: ConfigSection) -> NetworkSpec:
    defaults = NetworkSpec()
    activation = _resolve(ACTIVATIONS, section.get("activation", defaults.activation), section.field("activation"))
    return NetworkSpec(
        hidden=_int_tuple(section, "hidden", defaults.hidden) or (),
        activation=activation.value,
        discriminator_hidden=_int_tuple(section, "discriminator_hidden", None),
    )


def _parse_optimizer(section: ConfigSection) -> OptimizerSpec:
    defaults = OptimizerSpec()
    return OptimizerSpec(
        learning_rate=read_positive(section, "learning_rate", defaults.learning_rate),  # type: ignore[arg-type]
        discriminator_learning_rate=read_positive(
            section, "discriminator_learning_rate", defaults.discriminator_learning_rate
        ),  # type: ignore[arg-type]
        decay=read_real(section, "decay", defaults.decay, lambda v: 0 < v < 1, "in (0, 1)"),  # type: ignore[arg-type]
        epsilon=read_positive(section, "epsilon", defaults.epsilon),  # type: ignore[arg-type]
    )


def _parse_noise(section: ConfigSection) -> NoiseSpec:
    defaults = NoiseSpec()
    kind = _resolve(NOISE_KINDS, section.get("kind", defaults.kind), section.field("kind"))
    dim = section.get("dim")
    return NoiseSpec(
        kind=kind.value,
        scale=read_positive(section, "scale", defaults.scale),  # type: ignore[arg-type]
        dim=None if dim is None else read_int(section, "dim", 1, minimum=1),
    )


def _parse_init(section: ConfigSection) -> InitSpec:
    defaults = InitSpec()
    return InitSpec(
        mean=read_floats(section, "mean"),
        sd=read_positive(section, "sd", defaults.sd),  # type: ignore[arg-type]
    )


def _parse_evaluation(section: ConfigSection) -> EvalSpec:
    defaults = EvalSpec()
    raw_metrics = section.get("metrics", list(defaults.metrics))
    if isinstance(raw_metrics, str):
        raw_metrics = [raw_metrics]
    if not isinstance(raw_metrics, (list, tuple)):
        raise ConfigError(section.field("metrics"), "must be a list of metric names")
    metrics = tuple(str(m).strip().lower().replace("-", "_") for m in raw_metrics)
    for metric in metrics:
        if metric not in EVAL_METRICS:
            raise ConfigError(section.field("metrics"), f"unknown metric {metric!r} (choices: {', '.join(EVAL_METRICS)})")
    limits = read_floats(section, "plot_limits", length=4)
    if limits is not None and not (limits[0] < limits[1] and limits[2] < limits[3]):
        raise ConfigError(section.field("plot_limits"), "expected xmin < xmax and ymin < ymax")
    return EvalSpec(
        metrics=metrics,
        sample_size=read_int(section, "sample_size", defaults.sample_size, minimum=2),
        reference_size=read_int(section, "reference_size", defaults.reference_size, minimum=2),
        mode_radius=read_positive(section, "mode_radius", defaults.mode_radius),  # type: ignore[arg-type]
        posterior_samples=read_int(section, "posterior_samples", defaults.posterior_samples, minimum=1),
        plot_limits=limits,  # type: ignore[arg-type]
    )


def parse_experiment_config(raw: Any, base_dir: str | os.PathLike[str] | None = None) -> ExperimentConfig:
    """Validate a decoded YAML document; relative paths resolve against `base_dir`."""
    root = ConfigSection(raw, "")
    method = _resolve(METHODS, root.require("method"), "method")
    target = _parse_target(root.section("target"))
    seeds = _parse_seeds(root)
    kernel_section = root.section("kernel")
    kernel = _parse_kernel(kernel_section, method)
    kernel_section.finish()

    sections: dict[str, ConfigSection] = {
        name: root.section(name)
        for name in ("network", "optimizer", "schedule", "noise", "init", "evaluation")
    }
    if not method.is_neural:
        for name in ("network", "noise"):
            if sections[name].raw:
                raise ConfigError(name, f"does not apply to {method.value}")
    if method.is_neural and sections["init"].raw:
        raise ConfigError("init", f"does not apply to {method.value}")

    output_dir = root.get("output_dir")
    if output_dir is None:
        output_dir = str(Path(SETTINGS.output.runs_dir) / f"{method.value}-{target.kind}")
    resume_from = root.get("resume_from")
    if resume_from is not None and not method.is_neural:
        raise ConfigError("resume_from", "only neural samplers keep checkpoints")
    base = Path(base_dir) if base_dir is not None else None
    if base is not None:
        output_dir = str(base / output_dir) if not Path(str(output_dir)).is_absolute() else str(output_dir)
        if resume_from is not None and not Path(str(resume_from)).is_absolute():
            resume_from = str(base / str(resume_from))

    config = ExperimentConfig(
        method=method,
        target=target,
        seeds=seeds,
        output_dir=str(output_dir),
        network=_parse_network(sections["network"]),
        kernel=kernel,
        optimizer=_parse_optimizer(sections["optimizer"]),
        schedule=_parse_schedule(sections["schedule"], method, kernel),
        noise=_parse_noise(sections["noise"]),
        init=_parse_init(sections["init"]),
        evaluation=_parse_evaluation(sections["evaluation"]),
        resume_from=None if resume_from is None else str(resume_from),
    )
    for section in sections.values():
        section.finish()
    root.finish()
    return config


def load_experiment_config(path: str | os.PathLike[str]) -> ExperimentConfig:
    location = Path(path)
    try:
        text = location.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ConfigError("config", f"file not found: {location}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"{location} is not valid YAML: {exc}") from exc
    return parse_experiment_config(raw, base_dir=None)


__all__ = [
    "EVAL_METRICS",
    "KERNELS",
    "METHODS",
    "RBF_DEFAULT_CLIP",
    "TARGET_KINDS",
    "ConfigSection",
    "load_experiment_config",
    "parse_experiment_config",
    "read_floats",
    "read_int",
    "read_positive",
    "read_real",
]
