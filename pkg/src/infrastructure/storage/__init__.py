from .checkpoint import (
    FORMAT_VERSION,
    checkpoint_from_network,
    load_checkpoint,
    network_from_checkpoint,
    restore_rng,
    save_checkpoint,
)
from .dataset import load_dataset, make_synthetic_logistic, parse_dataset
from .delimited import (
    append_samples,
    ensure_directory,
    read_samples,
    read_trace,
    write_report,
    write_run_metrics,
    write_samples,
    write_trace,
)
from .scatter import emit_scatter_svg, render_scatter_svg

__all__ = [
    "FORMAT_VERSION",
    "append_samples",
    "checkpoint_from_network",
    "emit_scatter_svg",
    "ensure_directory",
    "load_checkpoint",
    "load_dataset",
    "make_synthetic_logistic",
    "network_from_checkpoint",
    "parse_dataset",
    "read_samples",
    "read_trace",
    "render_scatter_svg",
    "restore_rng",
    "save_checkpoint",
    "write_report",
    "write_run_metrics",
    "write_samples",
    "write_trace",
]
