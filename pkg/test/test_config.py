from pathlib import Path

import numpy as np
import pytest

from domain.errors import ConfigError
from domain.experiment import Method
from infrastructure.common.registry import NameResolver
from infrastructure.kernels import ImqKernel, RbfKernel
from infrastructure.targets import GaussianMixture, LogisticPosterior
from interfaces.experiment_config import RBF_DEFAULT_CLIP, load_experiment_config, parse_experiment_config
from interfaces.factory import build_components


def _raw(**overrides):
    raw = {"method": "ksd-ns", "target": {"kind": "ring8"}, "seeds": [0, 1], "output_dir": "out"}
    raw.update(overrides)
    return raw


def test_minimal_config_takes_defaults():
    config = parse_experiment_config(_raw())
    assert config.method is Method.KSD_NS
    assert config.target.kind == "ring8"
    assert config.seeds == (0, 1)
    assert config.kernel.kind == "imq"
    assert config.network.hidden == (200, 200)
    assert config.noise.kind == "uniform" and config.noise.scale == 10.0
    assert config.schedule.clip is None
    assert config.evaluation.metrics == ("moments", "mmd", "mode_coverage")


def test_aliases_resolve():
    config = parse_experiment_config(_raw(method="langevin", target={"kind": "ring-of-8"}))
    assert config.method is Method.SGLD
    assert config.target.kind == "ring8"


def test_name_resolver_normalizes_aliases_and_defaults():
    resolver = NameResolver({"ring8": 8, "crossed-mixture": 2}, aliases={"ring": "ring8"}, default_key="ring8")
    assert resolver.resolve(" Crossed_Mixture ") == 2
    assert resolver.resolve("RING") == 8
    assert resolver.resolve(None) == 8
    assert resolver.canonical("ring") == "ring8"
    with pytest.raises(ValueError, match="crossed-mixture, ring8"):
        resolver.resolve("banana")
    with pytest.raises(ValueError, match="required"):
        NameResolver({"a": 1}).resolve(None)


def test_name_resolver_rejects_dangling_names():
    with pytest.raises(ValueError, match="unknown keys"):
        NameResolver({"a": 1}, aliases={"b": "c"})
    with pytest.raises(ValueError, match="default_key"):
        NameResolver({"a": 1}, default_key="z")


def test_rbf_kernel_switches_clipping_on_for_ksd():
    config = parse_experiment_config(_raw(kernel={"kind": "rbf"}))
    assert config.schedule.clip == RBF_DEFAULT_CLIP
    explicit = parse_experiment_config(_raw(kernel={"kind": "rbf"}, schedule={"clip": None}))
    assert explicit.schedule.clip is None


def test_svgd_defaults_to_rbf():
    config = parse_experiment_config(_raw(method="svgd"))
    assert config.kernel.kind == "rbf"


@pytest.mark.parametrize(
    ("overrides", "field"),
    [
        ({"schedule": {"iterations": 10, "itertaions": 5}}, "schedule.itertaions"),
        ({"surprise": 1}, "surprise"),
        ({"seeds": []}, "seeds"),
        ({"seeds": [1, 1]}, "seeds"),
        ({"seeds": [-1]}, "seeds"),
        ({"method": "hmc"}, "method"),
        ({"target": {"kind": "banana"}}, "target.kind"),
        ({"schedule": {"lam": 0.5}}, "schedule.lam"),
        ({"schedule": {"batch_size": 1}}, "schedule.batch_size"),
        ({"kernel": {"kind": "imq", "bandwidth_sq": 2.0}}, "kernel.bandwidth_sq"),
        ({"kernel": {"kind": "rbf", "c": 2.0}}, "kernel.c"),
        ({"kernel": {"beta": -1.5}}, "kernel.beta"),
        ({"optimizer": {"learning_rate": 0}}, "optimizer.learning_rate"),
        ({"init": {"sd": 1.0}}, "init"),
        ({"evaluation": {"metrics": ["bleu"]}}, "evaluation.metrics"),
        ({"evaluation": {"plot_limits": [1, 0, 0, 1]}}, "evaluation.plot_limits"),
        ({"network": {"activation": "sigmoid"}}, "network.activation"),
    ],
)
def test_invalid_configs_name_their_field(overrides, field):
    with pytest.raises(ConfigError) as excinfo:
        parse_experiment_config(_raw(**overrides))
    assert excinfo.value.field == field


def test_baselines_reject_network_sections():
    with pytest.raises(ConfigError) as excinfo:
        parse_experiment_config(_raw(method="sgld", network={"hidden": [10]}))
    assert excinfo.value.field == "network"
    with pytest.raises(ConfigError):
        parse_experiment_config(_raw(method="sgld", resume_from="runs/old"))
    with pytest.raises(ConfigError):
        parse_experiment_config(_raw(method="svgd", schedule={"clip": 1.0}))


def test_missing_required_section():
    with pytest.raises(ConfigError) as excinfo:
        parse_experiment_config({"method": "ksd-ns", "seeds": [0]})
    assert excinfo.value.field == "target.kind"


def test_missing_file_and_bad_yaml(tmp_path):
    with pytest.raises(ConfigError):
        load_experiment_config(tmp_path / "absent.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("method: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_experiment_config(broken)


def test_shipped_configs_parse():
    shipped = sorted((Path(__file__).resolve().parents[1] / "configs").glob("*.yaml"))
    assert shipped
    for path in shipped:
        load_experiment_config(path)


def test_components_for_mixture_target():
    config = parse_experiment_config(
        _raw(
            target={
                "kind": "mixture",
                "components": [{"mean": [0.0, 0.0]}, {"mean": [3.0, 0.0], "covariance": [[1.0, 0.0], [0.0, 2.0]]}],
                "weights": [0.25, 0.75],
            },
            noise={"dim": 3},
        )
    )
    components = build_components(config)
    assert isinstance(components.target, GaussianMixture)
    np.testing.assert_allclose(components.target.weights, [0.25, 0.75])
    assert isinstance(components.kernel, ImqKernel)
    assert components.noise.dim == 3
    assert components.dataset is None


def test_components_for_synthetic_logistic_target():
    config = parse_experiment_config(
        _raw(
            method="sgld",
            target={"kind": "logistic", "num_data": 50, "num_features": 3, "split_seed": 2},
            evaluation={"metrics": ["accuracy"]},
        )
    )
    components = build_components(config)
    assert isinstance(components.target, LogisticPosterior)
    assert components.target.dim == 4
    assert components.target.num_data == 40
    assert components.dataset is not None


def test_component_errors_become_config_errors():
    with pytest.raises(ConfigError) as excinfo:
        build_components(parse_experiment_config(_raw(target={"kind": "ring8", "radius": 15.0, "sides": 6})))
    assert excinfo.value.field == "target.sides"
    with pytest.raises(ConfigError):
        build_components(parse_experiment_config(_raw(evaluation={"metrics": ["accuracy"]})))
    with pytest.raises(ConfigError):
        build_components(parse_experiment_config(_raw(method="svgd", init={"mean": [1.0, 2.0, 3.0]})))
    with pytest.raises(ConfigError) as excinfo:
        build_components(parse_experiment_config(_raw(target={"kind": "logistic", "dataset": "/no/such/file.csv"})))
    assert excinfo.value.field == "target.dataset"


def test_rbf_kernel_component():
    config = parse_experiment_config(_raw(kernel={"kind": "gaussian", "bandwidth_sq": 2.0}))
    kernel = build_components(config).kernel
    assert isinstance(kernel, RbfKernel)
    assert kernel.bandwidth_sq == 2.0
