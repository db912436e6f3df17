"""
Median-of-reps wall-clock timing.
"""
import time
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from sparseconv.config import Config

MAX_INNER_REPS = 1 << 16


@dataclass(frozen=True)
class TimingResult:
    median_seconds: float
    samples: List[float]
    inner_reps: int


def time_callable(fn: Callable[[], object], reps: int = Config.BENCH_REPS,
                  warmup: int = Config.BENCH_WARMUP,
                  min_sample_seconds: float = Config.BENCH_MIN_SAMPLE_SECONDS) -> TimingResult:
    """
    Time ``fn`` after ``warmup`` calls. Inner repetitions double until one
    sample lasts ``min_sample_seconds``; every sample is per call.
    """
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    for _ in range(warmup):
        fn()

    inner = 1
    while True:
        start = time.perf_counter()
        for _ in range(inner):
            fn()
        elapsed = time.perf_counter() - start
        if elapsed >= min_sample_seconds or inner >= MAX_INNER_REPS:
            break
        inner *= 2

    samples = [elapsed / inner]
    for _ in range(reps - 1):
        start = time.perf_counter()
        for _ in range(inner):
            fn()
        samples.append((time.perf_counter() - start) / inner)
    return TimingResult(float(np.median(samples)), samples, inner)
