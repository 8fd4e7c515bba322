from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from application.use_cases.evaluate import EvaluateSamples
from application.use_cases.generate_samples import GenerateSamples
from application.use_cases.run_experiment import EVAL_STREAM, RunExperiment
from config import SETTINGS
from domain.errors import CheckpointError, ConfigError, SamplerError
from domain.models import MetricReport
from infrastructure.common.serialization import dumps
from infrastructure.common.shutdown import get_shutdown_handler
from infrastructure.storage import emit_scatter_svg, read_samples, write_run_metrics
from interfaces.experiment_config import load_experiment_config
from interfaces.factory import build_components
from logging_config import configure_logging, set_log_level

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

logger = logging.getLogger("stein_sampler.cli")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stein-sampler",
        description="Train neural samplers with Stein discrepancies and benchmark them against particle methods",
    )
    parser.add_argument("--log-level", default=None, help="Override STEIN_SAMPLER_LOG_LEVEL (DEBUG, INFO, ...)")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run every seed of an experiment config")
    run.add_argument("config", help="YAML experiment file")

    sample = commands.add_parser("sample", help="Draw samples from a trained generator checkpoint")
    sample.add_argument("checkpoint", help="checkpoint.bin written by `run`")
    sample.add_argument("--count", type=int, required=True, help="Number of samples to draw")
    sample.add_argument("--seed", type=int, default=0, help="Noise seed")
    sample.add_argument("--out", required=True, help="Destination samples file")

    evaluate = commands.add_parser("eval", help="Score a samples file against the target of a config")
    evaluate.add_argument("samples", help="Samples file (header x1,...,xd)")
    evaluate.add_argument("config", help="YAML experiment file naming the target and metrics")
    evaluate.add_argument("--seed", type=int, default=0, help="Seed for the reference draws")
    evaluate.add_argument("--out", default=None, help="Write a metrics table here instead of printing JSON")

    plot = commands.add_parser("plot", help="Render a 2-D samples file as an SVG scatter plot")
    plot.add_argument("samples", help="Samples file with two columns")
    plot.add_argument("--out", required=True, help="Destination SVG file")
    plot.add_argument(
        "--limits", type=float, nargs=4, metavar=("XMIN", "XMAX", "YMIN", "YMAX"), default=None, help="Axis limits"
    )
    return parser


def _print_report(report: MetricReport) -> None:
    for name, summary in report.summaries.items():
        mse = "" if summary.mse is None else f" mse={summary.mse:.6g}"
        print(f"{name}: mean={summary.mean:.6g} se={summary.standard_error:.6g}{mse}")


def run_command(config_path: str) -> int:
    config = load_experiment_config(config_path)
    components = build_components(config)
    shutdown = get_shutdown_handler()
    shutdown.setup_signal_handlers()
    try:
        report = RunExperiment(config, components, should_stop=shutdown.is_shutting_down).execute()
    finally:
        shutdown.restore_signal_handlers()
    _print_report(report)
    print(f"Artifacts written to {config.output_dir}")
    return EXIT_OK


def sample_command(checkpoint: str, count: int, seed: int, out: str) -> int:
    if count < 0:
        raise ConfigError("--count", f"must be non-negative, got {count}")
    written = GenerateSamples(checkpoint).execute(count, seed, out)
    print(f"Wrote {written} samples to {out}")
    return EXIT_OK


def eval_command(samples_path: str, config_path: str, seed: int, out: str | None) -> int:
    config = load_experiment_config(config_path)
    components = build_components(config)
    samples = read_samples(samples_path)
    if samples.shape[1] != components.target.dim:
        raise ConfigError("samples", f"{samples_path} has {samples.shape[1]} columns, target needs {components.target.dim}")
    rng = np.random.default_rng([seed, EVAL_STREAM])
    metrics = EvaluateSamples(config.evaluation, components.target, components.dataset).execute(samples, seed, rng)
    if out is not None:
        write_run_metrics(out, [metrics])
    else:
        sys.stdout.write(dumps(metrics.as_row(), pretty=True).decode("utf-8") + "\n")
    return EXIT_OK


def plot_command(samples_path: str, out: str, limits: Sequence[float] | None) -> int:
    if limits is not None and not (limits[0] < limits[1] and limits[2] < limits[3]):
        raise ConfigError("--limits", "expected XMIN < XMAX and YMIN < YMAX")
    count = emit_scatter_svg(samples_path, out, limits)
    print(f"Plotted {count} samples to {out}")
    return EXIT_OK


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "run":
        return run_command(args.config)
    if args.command == "sample":
        return sample_command(args.checkpoint, args.count, args.seed, args.out)
    if args.command == "eval":
        return eval_command(args.samples, args.config, args.seed, args.out)
    return plot_command(args.samples, args.out, args.limits)


def main(argv: Sequence[str] | None = None) -> int:
    configure_logging(SETTINGS.log_level)
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_log_level(args.log_level)
    try:
        return dispatch(args)
    except ConfigError as exc:
        logger.error(f"Invalid configuration: {exc}", extra={"field": exc.field})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        missing = exc.filename or str(exc)
        logger.error(f"File not found: {missing}")
        print(f"error: file not found: {missing}", file=sys.stderr)
        return EXIT_USAGE
    except CheckpointError as exc:
        logger.error(f"Unusable checkpoint: {exc}", extra={"path": exc.path})
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except SamplerError as exc:
        logger.error(f"Run failed: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except KeyboardInterrupt:
        print("error: interrupted", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
