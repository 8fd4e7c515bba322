import numpy as np
import pytest

from domain.errors import CheckpointError, DatasetError, InsufficientSamplesError, ShapeError
from domain.models import MetricReport, MetricSummary, RunMetrics, TrainRecord, TrainTrace
from infrastructure.networks import RmsPropState, mlp_new, rmsprop_step
from infrastructure.storage import (
    checkpoint_from_network,
    emit_scatter_svg,
    load_checkpoint,
    network_from_checkpoint,
    parse_dataset,
    read_samples,
    read_trace,
    render_scatter_svg,
    restore_rng,
    save_checkpoint,
    write_report,
    write_samples,
    write_trace,
)
from infrastructure.storage.checkpoint import decode_checkpoint, encode_checkpoint
from infrastructure.storage.dataset import make_synthetic_logistic, split_indices


def _trained_network():
    mlp = mlp_new([2, 5, 2], "relu", 3)
    state = RmsPropState.for_network(mlp)
    mlp, state = rmsprop_step(state, mlp, [np.full_like(p, 0.5) for p in mlp.parameters()], 0.01)
    return mlp, state


def test_checkpoint_round_trip(tmp_path):
    mlp, state = _trained_network()
    rng = np.random.default_rng(9)
    rng.normal(size=3)
    path = tmp_path / "checkpoint.bin"
    save_checkpoint(path, checkpoint_from_network(mlp, noise_kind="gaussian", noise_scale=2.5, iteration=17, optimizer=state, rng=rng))

    checkpoint = load_checkpoint(path)
    restored, restored_state = network_from_checkpoint(checkpoint)
    assert checkpoint.iteration == 17
    assert checkpoint.noise_kind == "gaussian"
    assert checkpoint.noise_scale == 2.5
    assert restored.activation is mlp.activation
    assert restored.layer_dims == (2, 5, 2)
    np.testing.assert_array_equal(restored.flat_parameters(), mlp.flat_parameters())
    assert restored_state is not None
    np.testing.assert_array_equal(restored_state.flat_accumulators(), state.flat_accumulators())
    np.testing.assert_array_equal(restore_rng(checkpoint, 0).normal(size=4), rng.normal(size=4))


def test_checkpoint_without_optimizer_or_rng():
    mlp, _ = _trained_network()
    checkpoint = decode_checkpoint(encode_checkpoint(checkpoint_from_network(mlp, noise_kind="uniform", noise_scale=1.0, iteration=0)))
    _, state = network_from_checkpoint(checkpoint)
    assert state is None
    assert checkpoint.rng_state is None


def test_corrupted_checkpoints_are_rejected(tmp_path):
    mlp, state = _trained_network()
    raw = encode_checkpoint(checkpoint_from_network(mlp, noise_kind="uniform", noise_scale=1.0, iteration=3, optimizer=state))
    with pytest.raises(CheckpointError):
        decode_checkpoint(raw[:-5])
    with pytest.raises(CheckpointError):
        decode_checkpoint(b"NOTMAGIC" + raw[8:])
    with pytest.raises(CheckpointError):
        decode_checkpoint(raw + b"\x00")
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.bin")


def test_split_sizes_and_determinism():
    train, test = split_indices(5, seed=0)
    assert train.size == 4 and test.size == 1
    assert sorted(np.concatenate([train, test]).tolist()) == [0, 1, 2, 3, 4]
    again, _ = split_indices(5, seed=0)
    np.testing.assert_array_equal(train, again)


def test_parse_dataset_maps_labels_and_standardizes():
    text = "# label,a,b\n1,1.0,5\n0,2.0,5\n1,3.0,5\n\n0,4.0,5\n1,5.0,5\n"
    dataset = parse_dataset(text)
    np.testing.assert_array_equal(dataset.labels, [1.0, -1.0, 1.0, -1.0, 1.0])
    assert dataset.features[:, 0].mean() == pytest.approx(0.0, abs=1e-12)
    assert dataset.features[:, 0].std() == pytest.approx(1.0)
    np.testing.assert_array_equal(dataset.features[:, 1], np.zeros(5))
    assert dataset.train_indices.size == 4


def test_parse_dataset_accepts_signed_labels():
    dataset = parse_dataset("-1,0.5\n1,1.5\n")
    np.testing.assert_array_equal(dataset.labels, [-1.0, 1.0])


def test_parse_dataset_reads_quoted_fields_and_crlf():
    dataset = parse_dataset('"1", "2.5"\r\n0, 3.5\r\n')
    np.testing.assert_array_equal(dataset.labels, [1.0, -1.0])
    np.testing.assert_allclose(dataset.features[:, 0], [-1.0, 1.0])


@pytest.mark.parametrize(
    ("text", "line"),
    [
        ("1,2\n0,3,4\n", 2),
        ("1,2\n0,x\n", 2),
        ("1,2\n2,3\n", 2),
        ("1,2\n0,3\n-1,4\n", 3),
        ("1,2\r\n0,3\r\n1, x\r\n", 3),
        ("1,2\n0,\"3\"x\n", 2),
    ],
)
def test_parse_dataset_reports_offending_line(text, line):
    with pytest.raises(DatasetError) as excinfo:
        parse_dataset(text)
    assert excinfo.value.line == line


def test_parse_dataset_rejects_empty_input():
    with pytest.raises(InsufficientSamplesError):
        parse_dataset("# nothing here\n")


def test_synthetic_logistic_data():
    dataset = make_synthetic_logistic(200, 3, seed=1, label_noise=0.0)
    assert dataset.features.shape == (200, 3)
    assert set(np.unique(dataset.labels).tolist()) == {-1.0, 1.0}
    assert dataset.train_indices.size == 160
    with pytest.raises(ValueError):
        make_synthetic_logistic(10, 2, label_noise=0.5)


def test_samples_file_round_trip(tmp_path):
    samples = np.array([[0.1, -2.5], [1e-300, 3.0]])
    path = tmp_path / "samples.csv"
    write_samples(path, samples)
    assert path.read_text().splitlines()[0] == "x1,x2"
    np.testing.assert_array_equal(read_samples(path), samples)


def test_empty_samples_file_has_header_only(tmp_path):
    path = tmp_path / "samples.csv"
    write_samples(path, np.empty((0, 3)), dim=3)
    assert path.read_text() == "x1,x2,x3\n"
    assert read_samples(path).shape == (0, 3)


def test_trace_round_trip(tmp_path):
    trace = TrainTrace(method="ksd-ns")
    trace.append(TrainRecord(iteration=1, loss=0.5, wall_time=0.01, bandwidth=2.0))
    trace.append(TrainRecord(iteration=2, loss=0.25, wall_time=0.02, bandwidth=2.0, ksd_v=0.3))
    path = tmp_path / "trace.csv"
    write_trace(path, trace)
    restored = read_trace(path, "ksd-ns")
    assert restored.records == trace.records


def test_report_has_run_and_summary_tables(tmp_path):
    report = MetricReport(
        runs=(RunMetrics(seed=0, mmd=0.1), RunMetrics(seed=1, mmd=0.3)),
        summaries={"mmd": MetricSummary(mean=0.2, standard_error=0.1)},
    )
    path = tmp_path / "report.csv"
    write_report(path, report)
    lines = path.read_text().splitlines()
    assert lines[0] == "seed,h1,h2,mmd,mode_coverage,accuracy"
    assert lines[1] == "0,,,0.1,,"
    assert lines[3] == ""
    assert lines[4] == "metric,mean,standard_error,mse"
    assert lines[5] == "mmd,0.2,0.1,"


def test_scatter_of_no_points_is_a_valid_document():
    document = render_scatter_svg(np.empty((0, 2)))
    assert document.startswith("<?xml")
    assert "<circle" not in document


def test_scatter_maps_limits_onto_canvas(tmp_path):
    samples = np.array([[0.0, 0.0], [1.0, 1.0], [-1.0, -1.0]])
    source = tmp_path / "samples.csv"
    write_samples(source, samples)
    out = tmp_path / "plot.svg"
    assert emit_scatter_svg(source, out, (-1.0, 1.0, -1.0, 1.0)) == 3
    document = out.read_text()
    assert document.count("<circle") == 3
    assert 'cx="240.000" cy="240.000"' in document
    assert 'cx="460.000" cy="20.000"' in document


def test_scatter_rejects_other_dimensions():
    with pytest.raises(ShapeError):
        render_scatter_svg(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        render_scatter_svg(np.zeros((3, 2)), (1.0, 0.0, 0.0, 1.0))
