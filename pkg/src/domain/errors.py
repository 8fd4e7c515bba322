"""Error hierarchy shared by every layer of the sampler."""

from __future__ import annotations

from typing import TYPE_CHECKING, Any, Sequence

if TYPE_CHECKING:
    from .models import TrainTrace


class SamplerError(Exception):
    """Base class for all sampler failures."""


class ShapeError(SamplerError, ValueError):
    """Raised when array shapes do not fit the operation they are passed to."""

    def __init__(self, op: str, shapes: Sequence[tuple[int, ...]], detail: str = "") -> None:
        self.op = op
        self.shapes = tuple(tuple(shape) for shape in shapes)
        rendered = ", ".join(str(shape) for shape in self.shapes)
        message = f"{op}: incompatible shapes {rendered}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class InsufficientSamplesError(SamplerError, ValueError):
    """Raised when an estimator receives fewer rows than it needs."""

    def __init__(self, what: str, required: int, actual: int) -> None:
        self.required = required
        self.actual = actual
        super().__init__(f"{what} requires at least {required} samples, got {actual}")


class NonFiniteError(SamplerError, FloatingPointError):
    """Raised when a loss, gradient or update stops being finite."""

    def __init__(
        self,
        message: str,
        *,
        diagnostics: dict[str, Any] | None = None,
        trace: TrainTrace | None = None,
    ) -> None:
        self.diagnostics = dict(diagnostics or {})
        self.trace = trace
        if self.diagnostics:
            details = ", ".join(f"{key}={value}" for key, value in self.diagnostics.items())
            message = f"{message} [{details}]"
        super().__init__(message)


class ConfigError(SamplerError, ValueError):
    """Raised when an experiment config fails validation."""

    def __init__(self, field: str, message: str) -> None:
        self.field = field
        super().__init__(f"{field}: {message}")


class CheckpointError(SamplerError):
    """Raised for unreadable, truncated or incompatible checkpoint files."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


class DatasetError(SamplerError, ValueError):
    """Raised when a labelled dataset file cannot be ingested."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RunInterruptedError(SamplerError):
    """Raised when a run stops early on SIGINT/SIGTERM after saving its partial state."""

    def __init__(self, message: str, *, iteration: int | None = None) -> None:
        self.iteration = iteration
        super().__init__(message)


__all__ = [
    "SamplerError",
    "ShapeError",
    "InsufficientSamplesError",
    "NonFiniteError",
    "ConfigError",
    "CheckpointError",
    "DatasetError",
    "RunInterruptedError",
]
