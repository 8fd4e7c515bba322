"""Comma-delimited text artifacts: samples, training traces and metric tables."""

from __future__ import annotations

import csv
import io
import os
from dataclasses import fields
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from domain.errors import ShapeError
from domain.models import FloatArray, MetricReport, RunMetrics, TrainRecord, TrainTrace
from infrastructure.common.atomic import atomic_write

TRACE_COLUMNS = tuple(field.name for field in fields(TrainRecord))
RUN_COLUMNS = ("seed", "h1", "h2", "mmd", "mode_coverage", "accuracy")
SUMMARY_COLUMNS = ("metric", "mean", "standard_error", "mse")


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _sample_header(dim: int) -> str:
    return ",".join(f"x{index + 1}" for index in range(dim))


def format_samples(samples: FloatArray, dim: int | None = None) -> str:
    """Header x1,...,xd then one row per sample at full float64 precision."""
    array = np.asarray(samples, dtype=np.float64)
    if array.ndim != 2:
        if array.size == 0 and dim is not None:
            array = array.reshape(0, dim)
        else:
            raise ShapeError("write_samples", [array.shape], "expected an (n, d) matrix")
    buffer = io.StringIO()
    buffer.write(_sample_header(array.shape[1]) + "\n")
    if array.shape[0]:
        np.savetxt(buffer, array, fmt="%.17g", delimiter=",")
    return buffer.getvalue()


def write_samples(path: str | os.PathLike[str], samples: FloatArray, dim: int | None = None) -> None:
    with atomic_write(path) as handle:
        handle.write(format_samples(samples, dim))


def append_samples(handle: Any, samples: FloatArray) -> None:
    """Append rows (no header) to an open text handle."""
    np.savetxt(handle, np.asarray(samples, dtype=np.float64), fmt="%.17g", delimiter=",")


def read_samples(path: str | os.PathLike[str]) -> FloatArray:
    with open(path, encoding="utf-8", newline="") as handle:
        header = handle.readline().strip()
        if not header:
            raise ValueError(f"{path}: missing header row")
        dim = len(header.split(","))
        body = handle.read()
    if not body.strip():
        return np.empty((0, dim))
    array = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    if array.shape[1] != dim:
        raise ShapeError("read_samples", [array.shape], f"header declares {dim} columns")
    return array


def _write_rows(path: str | os.PathLike[str], columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> None:
    with atomic_write(path) as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _format(row.get(key)) for key in columns})


def write_trace(path: str | os.PathLike[str], trace: TrainTrace) -> None:
    rows = ({name: getattr(record, name) for name in TRACE_COLUMNS} for record in trace)
    _write_rows(path, TRACE_COLUMNS, rows)


def read_trace(path: str | os.PathLike[str], method: str) -> TrainTrace:
    trace = TrainTrace(method=method)
    with open(path, encoding="utf-8", newline="") as handle:
        for row in csv.DictReader(handle):
            trace.append(
                TrainRecord(
                    iteration=int(row["iteration"]),
                    loss=float(row["loss"]),
                    wall_time=float(row["wall_time"]),
                    **{
                        name: float(row[name]) if row.get(name) else None
                        for name in TRACE_COLUMNS[3:]
                    },
                )
            )
    return trace


def write_run_metrics(path: str | os.PathLike[str], runs: Sequence[RunMetrics]) -> None:
    _write_rows(path, RUN_COLUMNS, (run.as_row() for run in runs))


def write_report(path: str | os.PathLike[str], report: MetricReport) -> None:
    """Per-seed rows followed by one summary row per metric."""
    buffer = io.StringIO()
    runs = csv.DictWriter(buffer, fieldnames=list(RUN_COLUMNS), lineterminator="\n")
    runs.writeheader()
    for run in report.runs:
        runs.writerow({key: _format(value) for key, value in run.as_row().items()})
    buffer.write("\n")
    summary = csv.DictWriter(buffer, fieldnames=list(SUMMARY_COLUMNS), lineterminator="\n")
    summary.writeheader()
    for name, item in report.summaries.items():
        summary.writerow(
            {
                "metric": name,
                "mean": _format(item.mean),
                "standard_error": _format(item.standard_error),
                "mse": _format(item.mse),
            }
        )
    with atomic_write(path) as handle:
        handle.write(buffer.getvalue())


def ensure_directory(path: str | os.PathLike[str]) -> Path:
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


__all__ = [
    "RUN_COLUMNS",
    "TRACE_COLUMNS",
    "append_samples",
    "ensure_directory",
    "format_samples",
    "read_samples",
    "read_trace",
    "write_report",
    "write_run_metrics",
    "write_samples",
    "write_trace",
]
