from __future__ import annotations

import logging
import os
import time

import numpy as np

from config import SETTINGS
from infrastructure.common.atomic import atomic_write
from infrastructure.networks import NOISE_KINDS, NoiseLaw, mlp_forward
from infrastructure.storage import load_checkpoint, network_from_checkpoint
from infrastructure.storage.delimited import append_samples, format_samples
from metrics import get_metrics_collector

logger = logging.getLogger(__name__)


class GenerateSamples:
    """Forward fresh noise through a stored generator; no training step is taken."""

    def __init__(self, checkpoint_path: str | os.PathLike[str], chunk_size: int | None = None) -> None:
        self._checkpoint_path = checkpoint_path
        self._chunk_size = chunk_size or SETTINGS.output.sample_chunk_size

    def execute(self, count: int, seed: int, out_path: str | os.PathLike[str]) -> int:
        if count < 0:
            raise ValueError(f"count must be non-negative, got {count}")
        checkpoint = load_checkpoint(self._checkpoint_path)
        generator, _ = network_from_checkpoint(checkpoint)
        noise = NoiseLaw(
            kind=NOISE_KINDS.resolve(checkpoint.noise_kind),
            scale=checkpoint.noise_scale,
            dim=generator.input_dim,
        )
        rng = np.random.default_rng(seed)
        started = time.perf_counter()

        with atomic_write(out_path) as handle:
            handle.write(format_samples(np.empty((0, generator.output_dim)), generator.output_dim))
            remaining = count
            while remaining > 0:
                size = min(remaining, self._chunk_size)
                append_samples(handle, mlp_forward(generator, noise.sample(size, rng)))
                remaining -= size

        get_metrics_collector().record_samples(count)
        logger.info(
            "Samples written",
            extra={
                "path": str(out_path),
                "count": count,
                "seed": seed,
                "duration_s": round(time.perf_counter() - started, 3),
            },
        )
        return count


__all__ = ["GenerateSamples"]
