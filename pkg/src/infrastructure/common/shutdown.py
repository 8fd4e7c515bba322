"""Cooperative interruption of long training runs on SIGTERM/SIGINT."""

from __future__ import annotations

import logging
import signal
import threading
from types import FrameType

LOGGER = logging.getLogger(__name__)


class GracefulShutdown:
    """Turns SIGTERM/SIGINT into a flag that training loops poll between iterations."""

    def __init__(self) -> None:
        self._shutdown_event = threading.Event()
        self._previous_handlers: dict[signal.Signals, object] = {}

    def setup_signal_handlers(self) -> None:
        """Install SIGTERM and SIGINT handlers (main thread only)."""
        if self._previous_handlers:
            return
        if threading.current_thread() is not threading.main_thread():
            LOGGER.debug("Not on the main thread; signal handlers not installed")
            return

        def _signal_handler(signum: int, frame: FrameType | None) -> None:
            sig = signal.Signals(signum)
            if self._shutdown_event.is_set():
                # second signal: stop waiting for the iteration boundary
                raise KeyboardInterrupt
            LOGGER.info(f"Received signal {sig.name}, stopping after the current iteration")
            self._shutdown_event.set()

        for sig in (signal.SIGTERM, signal.SIGINT):
            self._previous_handlers[sig] = signal.signal(sig, _signal_handler)
        LOGGER.debug("Signal handlers registered for graceful shutdown")

    def restore_signal_handlers(self) -> None:
        for sig, handler in self._previous_handlers.items():
            signal.signal(sig, handler)  # type: ignore[arg-type]
        self._previous_handlers.clear()

    def is_shutting_down(self) -> bool:
        return self._shutdown_event.is_set()


# Global shutdown handler
_shutdown_handler: GracefulShutdown | None = None


def get_shutdown_handler() -> GracefulShutdown:
    """Get or create global shutdown handler."""
    global _shutdown_handler
    if _shutdown_handler is None:
        _shutdown_handler = GracefulShutdown()
    return _shutdown_handler


__all__ = ["GracefulShutdown", "get_shutdown_handler"]
