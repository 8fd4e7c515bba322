import signal

import numpy as np
import pytest

import interfaces.cli.main as cli_main
from infrastructure.common.serialization import loads
from infrastructure.common.shutdown import GracefulShutdown
from infrastructure.storage import load_checkpoint, read_samples, read_trace
from interfaces.cli.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main

SEED_FILES = ("checkpoint.bin", "trace.csv", "samples.csv", "metrics.csv", "samples.svg")


def _tiny_ring(output_dir, iterations=3, **extra):
    raw = {
        "method": "ksd-ns",
        "seeds": [0],
        "output_dir": str(output_dir),
        "target": {"kind": "ring8"},
        "network": {"hidden": [8]},
        "schedule": {"iterations": iterations, "batch_size": 10},
        "evaluation": {"sample_size": 40, "reference_size": 40, "plot_limits": [-20, 20, -20, 20]},
    }
    raw.update(extra)
    return raw


@pytest.fixture
def trained_run(tmp_path, write_config):
    output = tmp_path / "run"
    assert main(["run", str(write_config(_tiny_ring(output)))]) == EXIT_OK
    return output


def test_run_writes_every_artifact(trained_run):
    seed_dir = trained_run / "seed-0"
    for name in SEED_FILES:
        assert (seed_dir / name).is_file(), name
    assert (trained_run / "report.csv").is_file()
    report = loads((trained_run / "report.json").read_bytes())
    assert report["config"]["method"] == "ksd-ns"
    assert set(report["summaries"]) >= {"h1", "h2", "mmd", "mode_coverage"}
    assert read_samples(seed_dir / "samples.csv").shape == (40, 2)
    assert read_trace(seed_dir / "trace.csv", "ksd-ns").iterations == [1, 2, 3]
    assert load_checkpoint(seed_dir / "checkpoint.bin").iteration == 3


def test_missing_config_is_a_usage_error(tmp_path):
    assert main(["run", str(tmp_path / "absent.yaml")]) == EXIT_USAGE


def test_invalid_config_is_a_usage_error(tmp_path, write_config):
    path = write_config(_tiny_ring(tmp_path / "run", schedule={"iterations": -1}))
    assert main(["run", str(path)]) == EXIT_USAGE
    assert not (tmp_path / "run").exists()


def test_resume_continues_to_the_configured_length(tmp_path, write_config, trained_run):
    resumed = tmp_path / "resumed"
    config = _tiny_ring(resumed, iterations=5, resume_from=str(trained_run))
    assert main(["run", str(write_config(config, "resume.yaml"))]) == EXIT_OK
    assert read_trace(resumed / "seed-0" / "trace.csv", "ksd-ns").iterations == [1, 2, 3, 4, 5]

    straight = tmp_path / "straight"
    assert main(["run", str(write_config(_tiny_ring(straight, iterations=5), "straight.yaml"))]) == EXIT_OK
    np.testing.assert_array_equal(
        read_samples(resumed / "seed-0" / "samples.csv"), read_samples(straight / "seed-0" / "samples.csv")
    )


def test_resume_from_missing_checkpoint_fails(tmp_path, write_config):
    config = _tiny_ring(tmp_path / "out", resume_from=str(tmp_path / "nowhere"))
    assert main(["run", str(write_config(config))]) == EXIT_FAILURE


def test_sample_is_reproducible(tmp_path, trained_run):
    checkpoint = str(trained_run / "seed-0" / "checkpoint.bin")
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sample", checkpoint, "--count", "25", "--seed", "4", "--out", str(first)]) == EXIT_OK
    assert main(["sample", checkpoint, "--count", "25", "--seed", "4", "--out", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert read_samples(first).shape == (25, 2)


def test_sample_zero_writes_header_only(tmp_path, trained_run):
    out = tmp_path / "empty.csv"
    assert main(["sample", str(trained_run / "seed-0" / "checkpoint.bin"), "--count", "0", "--out", str(out)]) == EXIT_OK
    assert out.read_text() == "x1,x2\n"


def test_sample_rejects_bad_checkpoint(tmp_path):
    broken = tmp_path / "broken.bin"
    broken.write_bytes(b"not a checkpoint")
    assert main(["sample", str(broken), "--count", "3", "--out", str(tmp_path / "x.csv")]) == EXIT_FAILURE


def test_eval_prints_metrics(tmp_path, write_config, trained_run, capsys):
    config = write_config(_tiny_ring(tmp_path / "unused"))
    capsys.readouterr()
    assert main(["eval", str(trained_run / "seed-0" / "samples.csv"), str(config)]) == EXIT_OK
    metrics = loads(capsys.readouterr().out)
    assert metrics["seed"] == 0
    assert metrics["h1"] is not None
    assert metrics["mmd"] is not None


def test_eval_rejects_mismatched_dimension(tmp_path, write_config):
    samples = tmp_path / "samples.csv"
    samples.write_text("x1,x2,x3\n0,0,0\n1,1,1\n", encoding="utf-8")
    config = write_config(_tiny_ring(tmp_path / "unused"))
    assert main(["eval", str(samples), str(config)]) == EXIT_USAGE


def test_plot_writes_svg(tmp_path, trained_run):
    out = tmp_path / "plot.svg"
    samples = str(trained_run / "seed-0" / "samples.csv")
    assert main(["plot", samples, "--out", str(out), "--limits", "-20", "20", "-20", "20"]) == EXIT_OK
    assert out.read_text().count("<circle") == 40
    assert main(["plot", samples, "--out", str(out), "--limits", "1", "0", "0", "1"]) == EXIT_USAGE


def test_baseline_run_skips_checkpoints(tmp_path, write_config):
    output = tmp_path / "svgd"
    raw = {
        "method": "svgd",
        "seeds": [3],
        "output_dir": str(output),
        "target": {"kind": "crossed"},
        "schedule": {"iterations": 4},
        "init": {"mean": [0.0, 0.0], "sd": 1.0},
        "evaluation": {"sample_size": 30, "reference_size": 30, "mode_radius": 1.0},
    }
    assert main(["run", str(write_config(raw))]) == EXIT_OK
    seed_dir = output / "seed-3"
    assert not (seed_dir / "checkpoint.bin").exists()
    assert read_trace(seed_dir / "trace.csv", "svgd").iterations == [4]
    assert read_samples(seed_dir / "samples.csv").shape == (30, 2)


def test_sigint_saves_partial_state_and_fails(tmp_path, write_config, monkeypatch):
    shutdown = GracefulShutdown()
    monkeypatch.setattr(cli_main, "get_shutdown_handler", lambda: shutdown)
    output = tmp_path / "interrupted"
    shutdown.setup_signal_handlers()
    try:
        signal.raise_signal(signal.SIGINT)
        assert main(["run", str(write_config(_tiny_ring(output)))]) == EXIT_FAILURE
    finally:
        shutdown.restore_signal_handlers()
    seed_dir = output / "seed-0"
    assert load_checkpoint(seed_dir / "checkpoint.bin").iteration == 0
    assert read_trace(seed_dir / "trace.csv", "ksd-ns").iterations == []
    assert not (seed_dir / "samples.csv").exists()
    assert not (output / "report.json").exists()
