"""
Configuration management
"""
import os

from dotenv import load_dotenv

project_root_env = os.path.join(os.path.dirname(__file__), '../.env')
if os.path.exists(project_root_env):
    load_dotenv(project_root_env)


def _env_int(key: str, default: int) -> int:
    return int(os.environ.get(key, str(default)))


def _env_float(key: str, default: float) -> float:
    return float(os.environ.get(key, str(default)))


class Config:

    # ==================== Threads ====================
    # Kernel thread count; THREADS overrides the CLI default
    THREADS = _env_int("THREADS", os.cpu_count() or 1)

    # ==================== Logging ====================
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
    DEBUG = os.environ.get("DEBUG", "false").lower() == "true"

    # ==================== Kernel tiling ====================
    # Output channels per parallel task
    TILE_OUTPUT_CHANNELS = _env_int("TILE_OUTPUT_CHANNELS", 16)
    # Input channels per column band
    TILE_COLUMN_BLOCK = _env_int("TILE_COLUMN_BLOCK", 128)
    # Register block is 1 x W_out up to this width, else 1 x TILE_REGISTER_WIDTH
    TILE_REGISTER_MAX_ROW = 16
    TILE_REGISTER_WIDTH = 8
    # FC SpMDM: rows per task, batch columns per register block
    TILE_FC_ROWS = _env_int("TILE_FC_ROWS", 32)
    TILE_FC_COLUMNS = _env_int("TILE_FC_COLUMNS", 16)

    # ==================== Performance model ====================
    DEFAULT_ALPHA = _env_float("DEFAULT_ALPHA", 3.0)
    DEFAULT_BETA = _env_float("DEFAULT_BETA", 2.0)
    BYTES_PER_VALUE = 4

    # ==================== Guided sparsity learning ====================
    GSL_CHECK_PERIOD = _env_int("GSL_CHECK_PERIOD", 100)
    GSL_STABILIZATION_WINDOW = _env_int("GSL_STABILIZATION_WINDOW", 3)
    GSL_STABILIZATION_EPSILON = _env_float("GSL_STABILIZATION_EPSILON", 0.01)

    # ==================== Benchmark ====================
    BENCH_REPS = _env_int("BENCH_REPS", 5)
    BENCH_WARMUP = _env_int("BENCH_WARMUP", 2)
    # A timed sample shorter than this is repeated until it is not
    BENCH_MIN_SAMPLE_SECONDS = _env_float("BENCH_MIN_SAMPLE_SECONDS", 0.002)
    # Relative spread tolerated between calibration runs
    CALIBRATION_TOLERANCE = 0.20
    CALIBRATION_RUNS = 3
    CALIBRATION_MIN_SECONDS = _env_float("CALIBRATION_MIN_SECONDS", 1.0)
    CALIBRATION_GEMM_SIZE = _env_int("CALIBRATION_GEMM_SIZE", 1024)
    CALIBRATION_STREAM_ELEMENTS = _env_int("CALIBRATION_STREAM_ELEMENTS", 1 << 24)

    # ==================== Reproducibility ====================
    DEFAULT_SEED = _env_int("DEFAULT_SEED", 20170101)
