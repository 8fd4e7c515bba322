import signal

import numpy as np
import pytest

from application.use_cases import BaselineConfig, RunParticleBaseline
from application.use_cases.training import LoopSettings
from domain.experiment import Method
from infrastructure.common.shutdown import GracefulShutdown
from infrastructure.targets import IsotropicGaussian


@pytest.fixture
def shutdown():
    handler = GracefulShutdown()
    previous = signal.getsignal(signal.SIGINT)
    handler.setup_signal_handlers()
    yield handler
    handler.restore_signal_handlers()
    assert signal.getsignal(signal.SIGINT) is previous


def test_sigint_sets_the_stop_flag(shutdown):
    assert not shutdown.is_shutting_down()
    signal.raise_signal(signal.SIGINT)
    assert shutdown.is_shutting_down()


def test_second_sigint_interrupts_immediately(shutdown):
    signal.raise_signal(signal.SIGINT)
    with pytest.raises(KeyboardInterrupt):
        signal.raise_signal(signal.SIGINT)


def test_sigint_stops_a_particle_run_at_the_iteration_boundary(shutdown):
    signal.raise_signal(signal.SIGINT)
    runner = RunParticleBaseline(
        Method.SGLD,
        BaselineConfig(iterations=50),
        IsotropicGaussian(np.zeros(2)),
        loop=LoopSettings(should_stop=shutdown.is_shutting_down),
    )
    initial = np.ones((5, 2))
    result = runner.execute(initial, np.random.default_rng(0))
    assert result.interrupted
    assert result.particles.iteration == 0
    np.testing.assert_array_equal(result.particles.positions, initial)
