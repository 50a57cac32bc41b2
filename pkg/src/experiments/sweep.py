"""Order-preserving parallel map over independent sweep items.

Items are independent (one epsilon, one radius, one candidate); numpy and
scipy release the GIL in the heavy kernels, so a thread pool is enough and
avoids pickling profiles across processes.
"""

import os
from multiprocessing.pool import ThreadPool
from typing import Callable, Iterable, TypeVar

from dotenv import load_dotenv

from src.logger import Logger

load_dotenv()

LOGGER = Logger("experiments.sweep")

DEFAULT_WORKERS = 4

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """HSOT_THREADS from the environment (or .env), at least 1."""
    raw = os.getenv("HSOT_THREADS", str(DEFAULT_WORKERS))
    try:
        return max(1, int(raw))
    except ValueError:
        LOGGER.warning(f"Ignoring non-integer HSOT_THREADS={raw!r}")
        return DEFAULT_WORKERS


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """[fn(x) for x in items], computed concurrently; output order follows input order."""
    items = list(items)
    workers = min(workers or worker_count(), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    LOGGER.debug(f"Sweeping {len(items)} items on {workers} threads")
    with ThreadPool(workers) as pool:
        return pool.map(fn, items)
