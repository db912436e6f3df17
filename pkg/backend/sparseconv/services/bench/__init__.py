"""
Benchmark harness: calibration, sweeps and alpha fitting.
"""
from .calibrate import CalibrationResult, calibrate, calibrate_bandwidth, calibrate_flops
from .fit import AlphaFit, fit_alpha, fit_profile, measured_alpha
from .records import (
    CSV_COLUMNS,
    BenchRecord,
    nondecreasing_as_density_drops,
    read_records_csv,
    select,
    write_records_csv,
)
from .sweep import (
    SweepResult,
    SweepSpec,
    check_against_oracle,
    geometric_grid,
    model_overlay,
    parse_grid,
    run_sweep,
    synthetic_weights,
)
from .timing import TimingResult, time_callable
from .variants import BASELINE, VARIANTS, KernelVariant, Workload, variants_for

__all__ = [
    "AlphaFit", "BASELINE", "BenchRecord", "CSV_COLUMNS", "CalibrationResult", "KernelVariant",
    "SweepResult", "SweepSpec", "TimingResult", "VARIANTS", "Workload",
    "calibrate", "calibrate_bandwidth", "calibrate_flops", "check_against_oracle", "fit_alpha",
    "fit_profile", "geometric_grid", "measured_alpha", "model_overlay", "nondecreasing_as_density_drops",
    "parse_grid", "read_records_csv", "run_sweep", "select", "synthetic_weights", "time_callable",
    "variants_for", "write_records_csv",
]
