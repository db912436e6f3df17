"""
Machine calibration: sustained dense FLOP/s and streaming bandwidth.
"""
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from loguru import logger

from sparseconv.config import Config
from sparseconv.errors import CalibrationError
from sparseconv.models.profile import PlatformProfile
from sparseconv.services.conv._kernels import triad_kernel
from sparseconv.services.conv.threads import thread_count


@dataclass(frozen=True)
class CalibrationResult:
    profile: PlatformProfile
    flops_samples: List[float]
    bandwidth_samples: List[float]


def calibrate_flops(min_seconds: float = Config.CALIBRATION_MIN_SECONDS,
                    size: int = Config.CALIBRATION_GEMM_SIZE, seed: int = Config.DEFAULT_SEED) -> float:
    """Single-precision GEMM rate, 2*n^3 FLOP per product, over at least ``min_seconds``."""
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((size, size), dtype=np.float32)
    b = rng.standard_normal((size, size), dtype=np.float32)
    c = np.empty_like(a)
    np.matmul(a, b, out=c)

    iterations = 0
    start = time.perf_counter()
    while True:
        np.matmul(a, b, out=c)
        iterations += 1
        elapsed = time.perf_counter() - start
        if elapsed >= min_seconds:
            break
    return 2.0 * size ** 3 * iterations / elapsed


def calibrate_bandwidth(min_seconds: float = Config.CALIBRATION_MIN_SECONDS,
                        elements: int = Config.CALIBRATION_STREAM_ELEMENTS) -> float:
    """Triad a = b + q*c on float32 arrays; 3 * 4 bytes move per element."""
    a = np.zeros(elements, dtype=np.float32)
    b = np.ones(elements, dtype=np.float32)
    c = np.full(elements, 2.0, dtype=np.float32)
    triad_kernel(a, b, c, np.float32(3.0))

    iterations = 0
    start = time.perf_counter()
    while True:
        triad_kernel(a, b, c, np.float32(3.0))
        iterations += 1
        elapsed = time.perf_counter() - start
        if elapsed >= min_seconds:
            break
    return 3.0 * 4 * elements * iterations / elapsed


def _check_spread(quantity: str, samples: List[float], tolerance: float) -> None:
    spread = (max(samples) - min(samples)) / float(np.median(samples))
    if spread > tolerance:
        raise CalibrationError(quantity, [float(s) for s in samples], tolerance)


def calibrate(runs: int = Config.CALIBRATION_RUNS, tolerance: float = Config.CALIBRATION_TOLERANCE,
              name: str = "calibrated", alpha: float = Config.DEFAULT_ALPHA, beta: float = Config.DEFAULT_BETA,
              threads: Optional[int] = None, min_seconds: float = Config.CALIBRATION_MIN_SECONDS,
              output: Optional[Union[str, Path]] = None) -> CalibrationResult:
    """
    Repeat both measurements ``runs`` times; CalibrationError when either
    spreads more than ``tolerance`` around its median.
    """
    flops, bandwidth = [], []
    with thread_count(threads) as active:
        for run in range(runs):
            flops.append(calibrate_flops(min_seconds))
            bandwidth.append(calibrate_bandwidth(min_seconds))
            logger.info(
                f"[Calibrate] run {run + 1}/{runs} on {active} threads: "
                f"{flops[-1] / 1e9:.1f} GFLOP/s, {bandwidth[-1] / 1e9:.1f} GB/s"
            )
    _check_spread("FLOP/s", flops, tolerance)
    _check_spread("bandwidth", bandwidth, tolerance)

    profile = PlatformProfile(
        name=name,
        flops=float(np.median(flops)),
        bandwidth=float(np.median(bandwidth)),
        alpha=alpha,
        beta=beta,
    )
    if output is not None:
        profile.to_json_file(output)
        logger.info(f"[Calibrate] profile written to {output}")
    return CalibrationResult(profile, flops, bandwidth)
