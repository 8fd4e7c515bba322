from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Final

from dotenv import load_dotenv

from logging_config import configure_logging

load_dotenv()


def _get_env(name: str) -> str | None:
    value = os.getenv(name)
    return value.strip() if value is not None else None


def _get_int(name: str, default: int) -> int:
    raw = _get_env(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:  # noqa: TRY003 - propagate config errors clearly
        raise ValueError(f"Environment variable {name} must be an integer") from exc


def _get_str(name: str, default: str) -> str:
    raw = _get_env(name)
    return raw if raw is not None else default


def _get_bool(name: str, default: bool) -> bool:
    raw = _get_env(name)
    if raw is None:
        return default
    lowered = raw.lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"Environment variable {name} must be a boolean")


@dataclass(frozen=True)
class TrainingSettings:
    log_every: int
    # V-statistic and particle log-density diagnostics land in the trace every N iterations
    diagnostic_every: int


@dataclass(frozen=True)
class OutputSettings:
    runs_dir: str
    sample_chunk_size: int
    export_metrics_textfile: bool


@dataclass(frozen=True)
class Settings:
    log_level: str
    training: TrainingSettings
    output: OutputSettings


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    training = TrainingSettings(
        log_every=max(1, _get_int("STEIN_SAMPLER_LOG_EVERY", 500)),
        diagnostic_every=max(1, _get_int("STEIN_SAMPLER_DIAGNOSTIC_EVERY", 100)),
    )

    output = OutputSettings(
        runs_dir=_get_str("STEIN_SAMPLER_RUNS_DIR", "runs"),
        sample_chunk_size=max(1, _get_int("STEIN_SAMPLER_SAMPLE_CHUNK_SIZE", 10000)),
        export_metrics_textfile=_get_bool("STEIN_SAMPLER_EXPORT_METRICS", True),
    )

    return Settings(
        log_level=_get_str("STEIN_SAMPLER_LOG_LEVEL", "INFO"),
        training=training,
        output=output,
    )


SETTINGS: Final[Settings] = get_settings()
configure_logging(SETTINGS.log_level)
