from __future__ import annotations

import logging
from typing import Final

LOG_FORMAT: Final = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"
LOG_DATE_FORMAT: Final = "%Y-%m-%d %H:%M:%S"
DEFAULT_LEVEL: Final = "INFO"


class ColorFormatter(logging.Formatter):
    COLORS: Final = {
        logging.DEBUG: "\033[37m",
        logging.INFO: "\033[32m",
        logging.WARNING: "\033[33m",
        logging.ERROR: "\033[31m",
        logging.CRITICAL: "\033[41m",
    }
    RESET: Final = "\033[0m"

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelno, self.RESET)
        formatted = super().format(record)
        return f"{color}{formatted}{self.RESET}"


def level_from_name(raw_level: str) -> int:
    """Numeric level for a name such as 'debug'; unknown names fall back to INFO."""
    level = logging.getLevelName(raw_level.strip().upper())
    return level if isinstance(level, int) else logging.INFO


def _has_color_handler(root_logger: logging.Logger) -> bool:
    return any(isinstance(handler.formatter, ColorFormatter) for handler in root_logger.handlers)


def configure_logging(raw_level: str = DEFAULT_LEVEL) -> None:
    """Install the coloured stderr handler once; later calls only adjust the level."""
    root_logger = logging.getLogger()
    if _has_color_handler(root_logger):
        set_log_level(raw_level)
        return

    level = level_from_name(raw_level)
    root_logger.setLevel(level)

    handler = logging.StreamHandler()
    handler.setLevel(level)
    handler.setFormatter(ColorFormatter(LOG_FORMAT, LOG_DATE_FORMAT))
    root_logger.addHandler(handler)


def set_log_level(raw_level: str) -> None:
    """Override the root level (and its handlers) after configuration, e.g. from a CLI flag."""
    level = level_from_name(raw_level)
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    for handler in root_logger.handlers:
        if isinstance(handler.formatter, ColorFormatter):
            handler.setLevel(level)
