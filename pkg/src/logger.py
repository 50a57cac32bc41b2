import logging
import os
import sys
import time
from contextlib import contextmanager
from enum import Enum


class LogLevel(Enum):
    DEBUG = logging.DEBUG
    INFO = logging.INFO
    WARNING = logging.WARNING
    ERROR = logging.ERROR
    CRITICAL = logging.CRITICAL


def _level_from_env(default: LogLevel = LogLevel.WARNING) -> LogLevel:
    name = os.getenv("HSOT_LOG_LEVEL", "").strip().upper()
    return LogLevel[name] if name in LogLevel.__members__ else default


class Logger:
    def __init__(self, name: str, level: LogLevel | None = None):
        self.logger = logging.getLogger(f"hsot.{name}")
        self.logger.setLevel((level or _level_from_env()).value)

        if not self.logger.handlers:
            handler = logging.StreamHandler(sys.stderr)
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            self.logger.addHandler(handler)
            self.logger.propagate = False

    def set_level(self, level: LogLevel):
        self.logger.setLevel(level.value)

    def debug(self, message: str):
        self.logger.debug(message)

    def info(self, message: str):
        self.logger.info(message)

    def warning(self, message: str):
        self.logger.warning(message)

    def error(self, message: str):
        self.logger.error(message)

    def critical(self, message: str):
        self.logger.critical(message)

    @contextmanager
    def timed(self, label: str, sink: dict[str, float] | None = None):
        """Context manager that logs elapsed time for a block of code.

        When `sink` is given the elapsed seconds are also stored under `label`,
        which is how run reports collect their stage durations.

        Usage:
            with logger.timed("monotone map", sink=durations):
                r = monotone_map(source, target)
        """
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed = time.perf_counter() - start
            if sink is not None:
                sink[label] = sink.get(label, 0.0) + elapsed
            if elapsed >= 1.0:
                self.info(f"{label} done in {elapsed:.2f}s")
            else:
                self.info(f"{label} done in {elapsed * 1000:.0f}ms")
