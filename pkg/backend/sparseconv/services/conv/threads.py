"""
Thread-count control over numba's pool and the BLAS pool numpy calls into.
"""
from contextlib import contextmanager
from typing import Iterator, Optional

import numba
from loguru import logger
from threadpoolctl import threadpool_limits

from sparseconv.config import Config


def max_threads() -> int:
    return int(numba.config.NUMBA_NUM_THREADS)


def resolve_threads(requested: Optional[int] = None) -> int:
    """Requested count, else Config.THREADS, clamped to the pool size."""
    threads = requested if requested is not None else Config.THREADS
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    limit = max_threads()
    if threads > limit:
        logger.warning(f"[Threads] {threads} threads requested, pool has {limit}; using {limit}")
        threads = limit
    return threads


@contextmanager
def thread_count(threads: Optional[int] = None) -> Iterator[int]:
    """Run the enclosed numba kernels and BLAS calls on ``threads`` workers, then restore."""
    previous = numba.get_num_threads()
    active = resolve_threads(threads)
    numba.set_num_threads(active)
    try:
        with threadpool_limits(limits=active, user_api="blas"):
            yield active
    finally:
        numba.set_num_threads(previous)
