from __future__ import annotations

import csv
import io
import logging
import math
import os
from pathlib import Path
from typing import Any, Iterator

import numpy as np

from domain.errors import DatasetError, InsufficientSamplesError
from domain.models import FloatArray, LabeledDataset

logger = logging.getLogger(__name__)

TRAIN_FRACTION = 0.8
_LABEL_MAPS = (
    {0.0: -1.0, 1.0: 1.0},
    {-1.0: -1.0, 1.0: 1.0},
)


def split_indices(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded permutation cut into ceil(0.8 n) train and floor(0.2 n) test rows."""
    order = np.random.default_rng(seed).permutation(n)
    cut = math.ceil(TRAIN_FRACTION * n)
    return np.sort(order[:cut]), np.sort(order[cut:])


def standardize(features: FloatArray) -> FloatArray:
    """Per-column mean 0 / sd 1; constant columns become all zeros."""
    centered = features - features.mean(axis=0)
    sd = features.std(axis=0)
    safe = np.where(sd > 0.0, sd, 1.0)
    return np.where(sd > 0.0, centered / safe, 0.0)


def _normalize_labels(raw: FloatArray, lines: list[int]) -> FloatArray:
    seen = set(np.unique(raw).tolist())
    for mapping in _LABEL_MAPS:
        if seen <= set(mapping):
            return np.array([mapping[value] for value in raw.tolist()])
    allowed = {0.0, 1.0, -1.0}
    for value, line in zip(raw.tolist(), lines):
        if value not in allowed:
            raise DatasetError(f"unseen label value {value!r}", line=line)
    # both conventions present: report where the second one first appears
    first: dict[float, int] = {}
    for value, line in zip(raw.tolist(), lines):
        first.setdefault(value, line)
    raise DatasetError("labels mix the {0, 1} and {-1, +1} conventions", line=max(first[0.0], first[-1.0]))


def _numbered_records(reader: Any) -> Iterator[tuple[int, list[str]]]:
    try:
        for record in reader:
            yield reader.line_num, record
    except csv.Error as exc:
        raise DatasetError(f"malformed row ({exc})", line=reader.line_num) from exc


def parse_dataset(text: str, seed: int = 0) -> LabeledDataset:
    rows: list[list[float]] = []
    lines: list[int] = []
    width: int | None = None
    reader = csv.reader(io.StringIO(text, newline=""), skipinitialspace=True, strict=True)
    for number, record in _numbered_records(reader):
        fields = [field.strip() for field in record]
        if not any(fields) or fields[0].startswith("#"):
            continue
        if width is None:
            width = len(fields)
            if width < 2:
                raise DatasetError("each row needs a label and at least one feature", line=number)
        elif len(fields) != width:
            raise DatasetError(f"ragged row: expected {width} fields, got {len(fields)}", line=number)
        try:
            rows.append([float(field) for field in fields])
        except ValueError as exc:
            raise DatasetError(f"non-numeric field ({exc})", line=number) from exc
        lines.append(number)
    if not rows:
        raise InsufficientSamplesError("dataset", 1, 0)
    table = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(table)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(table), axis=1))[0])
        raise DatasetError("non-finite field", line=lines[bad])
    labels = _normalize_labels(table[:, 0], lines)
    features = standardize(table[:, 1:])
    train, test = split_indices(table.shape[0], seed)
    return LabeledDataset(features=features, labels=labels, train_indices=train, test_indices=test)


def load_dataset(path: str | os.PathLike[str], seed: int = 0) -> LabeledDataset:
    """Rows of `label,feature_1,...,feature_p`; labels in {0, 1} or {-1, +1}."""
    location = Path(path)
    dataset = parse_dataset(location.read_text(encoding="utf-8"), seed)
    logger.info(
        "Dataset loaded",
        extra={
            "path": str(location),
            "rows": int(dataset.features.shape[0]),
            "features": dataset.num_features,
            "train": int(dataset.train_indices.size),
            "test": int(dataset.test_indices.size),
        },
    )
    return dataset


def make_synthetic_logistic(
    num_data: int = 5000,
    num_features: int = 54,
    *,
    seed: int = 0,
    label_noise: float = 0.1,
    margin: float = 0.1,
) -> LabeledDataset:
    """Linearly separable data (points within `margin` of the plane are dropped) with flipped labels."""
    if num_data < 2 or num_features < 1:
        raise ValueError("need at least two rows and one feature")
    if not 0.0 <= label_noise < 0.5:
        raise ValueError(f"label_noise must lie in [0, 0.5), got {label_noise}")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(num_features)
    direction /= np.linalg.norm(direction)
    accepted: list[FloatArray] = []
    count = 0
    while count < num_data:
        draw = rng.standard_normal((2 * num_data, num_features))
        keep = draw[np.abs(draw @ direction) >= margin]
        accepted.append(keep)
        count += keep.shape[0]
    features = np.vstack(accepted)[:num_data]
    labels = np.where(features @ direction >= 0.0, 1.0, -1.0)
    flips = rng.random(num_data) < label_noise
    labels[flips] *= -1.0
    train, test = split_indices(num_data, seed)
    return LabeledDataset(features=standardize(features), labels=labels, train_indices=train, test_indices=test)


__all__ = ["TRAIN_FRACTION", "load_dataset", "make_synthetic_logistic", "parse_dataset", "split_indices", "standardize"]
