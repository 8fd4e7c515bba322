from prometheus_client import REGISTRY

from metrics import get_metrics_collector


def _value(name, **labels):
    return REGISTRY.get_sample_value(name, labels) or 0.0


def test_iterations_and_losses_reach_the_registry():
    collector = get_metrics_collector()
    before = _value("sampler_iterations_total", method="metrics-test")
    collector.record_iteration("metrics-test", 1, {"ksd": 0.25}, bandwidth=2.0)
    collector.record_iteration("metrics-test", 2, {"ksd": 0.125})
    assert _value("sampler_iterations_total", method="metrics-test") == before + 2
    assert _value("sampler_loss", method="metrics-test", loss="ksd") == 0.125
    assert _value("sampler_bandwidth", method="metrics-test") == 2.0


def test_aborts_and_runs_are_counted():
    collector = get_metrics_collector()
    aborts = _value("sampler_aborts_total", method="metrics-test", reason="non_finite_loss")
    failures = _value("sampler_runs_total", method="metrics-test", status="failure")
    collector.record_abort("metrics-test", "non_finite_loss", 7)
    collector.record_run("metrics-test", 0, False, 0.5)
    assert _value("sampler_aborts_total", method="metrics-test", reason="non_finite_loss") == aborts + 1
    assert _value("sampler_runs_total", method="metrics-test", status="failure") == failures + 1


def test_textfile_export(tmp_path):
    collector = get_metrics_collector()
    collector.record_samples(3)
    path = tmp_path / "metrics.prom"
    collector.export_textfile(path)
    text = path.read_text()
    assert "sampler_samples_generated_total" in text
    assert "sampler_build_info" in text
