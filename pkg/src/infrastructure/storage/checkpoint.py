"""Binary checkpoint layout (all integers little-endian).

    magic      8 bytes  b"STEINNS\\x00"
    version    u32
    dims       u32 count, then count x u32
    activation u32 length + utf-8
    noise kind u32 length + utf-8
    noise scale, rmsprop decay, rmsprop epsilon: f64
    iteration  u64
    parameters u64 count, then count x f64 (W0, b0, W1, b1, ... row-major)
    accumulators u8 flag, then count x f64 when set
    rng state  u32 length + JSON (0 length: none)
"""

from __future__ import annotations

import logging
import os
import struct
from pathlib import Path
from typing import Any

import numpy as np

from domain.errors import CheckpointError
from domain.models import Checkpoint, FloatArray
from infrastructure.common.atomic import atomic_write
from infrastructure.common.serialization import decode_big_ints, dumps, encode_big_ints, loads
from infrastructure.networks import ACTIVATIONS, Mlp, RmsPropState

logger = logging.getLogger(__name__)

MAGIC = b"STEINNS\x00"
FORMAT_VERSION = 1


def _parameter_count(dims: tuple[int, ...]) -> int:
    return sum(fan_out * fan_in + fan_out for fan_in, fan_out in zip(dims[:-1], dims[1:]))


def _text(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    params = np.ascontiguousarray(checkpoint.parameters, dtype="<f8")
    if params.shape != (_parameter_count(checkpoint.layer_dims),):
        raise ValueError(
            f"parameter count {params.size} does not match dims {list(checkpoint.layer_dims)}"
        )
    parts = [
        MAGIC,
        struct.pack("<I", checkpoint.version),
        struct.pack("<I", len(checkpoint.layer_dims)),
        struct.pack(f"<{len(checkpoint.layer_dims)}I", *checkpoint.layer_dims),
        _text(checkpoint.activation),
        _text(checkpoint.noise_kind),
        struct.pack("<ddd", checkpoint.noise_scale, checkpoint.optimizer_decay, checkpoint.optimizer_epsilon),
        struct.pack("<Q", checkpoint.iteration),
        struct.pack("<Q", params.size),
        params.tobytes(),
    ]
    if checkpoint.accumulators is None:
        parts.append(struct.pack("<B", 0))
    else:
        accumulators = np.ascontiguousarray(checkpoint.accumulators, dtype="<f8")
        if accumulators.shape != params.shape:
            raise ValueError("optimizer accumulators must match the parameter vector")
        parts.extend([struct.pack("<B", 1), accumulators.tobytes()])
    rng_payload = b"" if checkpoint.rng_state is None else dumps(encode_big_ints(checkpoint.rng_state))
    parts.extend([struct.pack("<I", len(rng_payload)), rng_payload])
    return b"".join(parts)


class _Reader:
    def __init__(self, path: str, raw: bytes) -> None:
        self._path = path
        self._raw = raw
        self._offset = 0

    def take(self, size: int, what: str) -> bytes:
        end = self._offset + size
        if end > len(self._raw):
            raise CheckpointError(self._path, f"truncated while reading {what}")
        chunk = self._raw[self._offset : end]
        self._offset = end
        return chunk

    def unpack(self, fmt: str, what: str) -> tuple[Any, ...]:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def text(self, what: str) -> str:
        (length,) = self.unpack("<I", what)
        try:
            return self.take(length, what).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CheckpointError(self._path, f"{what} is not valid utf-8") from exc

    def floats(self, count: int, what: str) -> FloatArray:
        return np.frombuffer(self.take(8 * count, what), dtype="<f8").astype(np.float64)

    @property
    def exhausted(self) -> bool:
        return self._offset == len(self._raw)


def decode_checkpoint(raw: bytes, path: str = "<memory>") -> Checkpoint:
    reader = _Reader(path, raw)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise CheckpointError(path, "not a sampler checkpoint (bad magic)")
    (version,) = reader.unpack("<I", "version")
    if version != FORMAT_VERSION:
        raise CheckpointError(path, f"unsupported checkpoint version {version} (expected {FORMAT_VERSION})")
    (num_dims,) = reader.unpack("<I", "dims")
    if num_dims < 2:
        raise CheckpointError(path, f"network needs at least two layer sizes, got {num_dims}")
    dims = tuple(int(d) for d in reader.unpack(f"<{num_dims}I", "dims"))
    activation = reader.text("activation")
    noise_kind = reader.text("noise kind")
    noise_scale, decay, epsilon = reader.unpack("<ddd", "scalars")
    (iteration,) = reader.unpack("<Q", "iteration")
    (count,) = reader.unpack("<Q", "parameter count")
    if count != _parameter_count(dims):
        raise CheckpointError(path, f"parameter count {count} inconsistent with dims {list(dims)}")
    parameters = reader.floats(count, "parameters")
    (has_accumulators,) = reader.unpack("<B", "accumulator flag")
    accumulators = reader.floats(count, "accumulators") if has_accumulators else None
    (rng_length,) = reader.unpack("<I", "rng state")
    rng_state = None
    if rng_length:
        try:
            rng_state = decode_big_ints(loads(reader.take(rng_length, "rng state")))
        except ValueError as exc:
            raise CheckpointError(path, "rng state is not valid JSON") from exc
    if not reader.exhausted:
        raise CheckpointError(path, "trailing bytes after checkpoint payload")
    try:
        ACTIVATIONS.canonical(activation)
    except ValueError as exc:
        raise CheckpointError(path, str(exc)) from exc
    return Checkpoint(
        version=version,
        layer_dims=dims,
        activation=activation,
        noise_kind=noise_kind,
        noise_scale=noise_scale,
        parameters=parameters,
        accumulators=accumulators,
        optimizer_decay=decay,
        optimizer_epsilon=epsilon,
        iteration=int(iteration),
        rng_state=rng_state,
    )


def save_checkpoint(path: str | os.PathLike[str], checkpoint: Checkpoint) -> None:
    payload = encode_checkpoint(checkpoint)
    with atomic_write(path, "wb") as handle:
        handle.write(payload)
    logger.debug("Checkpoint written", extra={"path": str(path), "iteration": checkpoint.iteration})


def load_checkpoint(path: str | os.PathLike[str]) -> Checkpoint:
    location = Path(path)
    try:
        raw = location.read_bytes()
    except OSError as exc:
        raise CheckpointError(str(location), f"cannot read checkpoint: {exc.strerror or exc}") from exc
    return decode_checkpoint(raw, str(location))


def checkpoint_from_network(
    mlp: Mlp,
    *,
    noise_kind: str,
    noise_scale: float,
    iteration: int,
    optimizer: RmsPropState | None = None,
    rng: np.random.Generator | None = None,
) -> Checkpoint:
    return Checkpoint(
        version=FORMAT_VERSION,
        layer_dims=mlp.layer_dims,
        activation=mlp.activation.value,
        noise_kind=noise_kind,
        noise_scale=float(noise_scale),
        parameters=mlp.flat_parameters(),
        accumulators=optimizer.flat_accumulators() if optimizer is not None else None,
        optimizer_decay=optimizer.decay if optimizer is not None else 0.0,
        optimizer_epsilon=optimizer.epsilon if optimizer is not None else 0.0,
        iteration=int(iteration),
        rng_state=dict(rng.bit_generator.state) if rng is not None else None,
    )


def network_from_checkpoint(checkpoint: Checkpoint) -> tuple[Mlp, RmsPropState | None]:
    """Rebuild the network and, when stored, its optimizer state."""
    dims = checkpoint.layer_dims
    template = Mlp(
        layer_dims=dims,
        weights=tuple(np.zeros((fan_out, fan_in)) for fan_in, fan_out in zip(dims[:-1], dims[1:])),
        biases=tuple(np.zeros(fan_out) for fan_out in dims[1:]),
        activation=ACTIVATIONS.resolve(checkpoint.activation),
    )
    mlp = template.with_flat_parameters(checkpoint.parameters)
    optimizer = None
    if checkpoint.accumulators is not None:
        optimizer = RmsPropState.for_network(
            mlp, decay=checkpoint.optimizer_decay, epsilon=checkpoint.optimizer_epsilon
        ).with_flat_accumulators(checkpoint.accumulators)
    return mlp, optimizer


def restore_rng(checkpoint: Checkpoint, fallback_seed: int) -> np.random.Generator:
    rng = np.random.default_rng(fallback_seed)
    if checkpoint.rng_state is not None:
        try:
            rng.bit_generator.state = checkpoint.rng_state
        except (TypeError, ValueError, KeyError) as exc:
            raise CheckpointError("<rng>", f"incompatible rng state: {exc}") from exc
    return rng


__all__ = [
    "FORMAT_VERSION",
    "MAGIC",
    "checkpoint_from_network",
    "decode_checkpoint",
    "encode_checkpoint",
    "load_checkpoint",
    "network_from_checkpoint",
    "restore_rng",
    "save_checkpoint",
]
