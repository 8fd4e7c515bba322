import logging

import pytest

from config import get_settings
from logging_config import ColorFormatter, configure_logging, level_from_name, set_log_level


@pytest.fixture
def fresh_settings():
    get_settings.cache_clear()
    yield get_settings
    get_settings.cache_clear()


@pytest.fixture
def root_logger():
    root = logging.getLogger()
    level, handlers = root.level, {handler: handler.level for handler in root.handlers}
    yield root
    for handler, handler_level in handlers.items():
        handler.setLevel(handler_level)
    for handler in list(root.handlers):
        if handler not in handlers:
            root.removeHandler(handler)
    root.setLevel(level)


def test_settings_read_the_environment(monkeypatch, fresh_settings):
    monkeypatch.setenv("STEIN_SAMPLER_LOG_LEVEL", "debug")
    monkeypatch.setenv("STEIN_SAMPLER_LOG_EVERY", "25")
    monkeypatch.setenv("STEIN_SAMPLER_EXPORT_METRICS", "off")
    settings = fresh_settings()
    assert settings.log_level == "debug"
    assert settings.training.log_every == 25
    assert settings.output.export_metrics_textfile is False
    assert settings.output.sample_chunk_size == 10000


def test_bad_environment_values_name_the_variable(monkeypatch, fresh_settings):
    monkeypatch.setenv("STEIN_SAMPLER_DIAGNOSTIC_EVERY", "often")
    with pytest.raises(ValueError, match="STEIN_SAMPLER_DIAGNOSTIC_EVERY"):
        fresh_settings()


def test_configured_level_reaches_the_root_logger(monkeypatch, fresh_settings, root_logger):
    monkeypatch.setenv("STEIN_SAMPLER_LOG_LEVEL", "WARNING")
    configure_logging(fresh_settings().log_level)
    assert root_logger.level == logging.WARNING
    colored = [h for h in root_logger.handlers if isinstance(h.formatter, ColorFormatter)]
    assert len(colored) == 1
    assert colored[0].level == logging.WARNING

    configure_logging("error")
    assert [h for h in root_logger.handlers if isinstance(h.formatter, ColorFormatter)] == colored
    assert root_logger.level == logging.ERROR
    set_log_level("debug")
    assert colored[0].level == logging.DEBUG


def test_unknown_level_names_fall_back_to_info():
    assert level_from_name(" warning ") == logging.WARNING
    assert level_from_name("chatty") == logging.INFO
