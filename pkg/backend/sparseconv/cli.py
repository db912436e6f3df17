"""
Command line entry point: calibration, sweeps, model projections, alpha
fitting and the guided sparsity runs.
"""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from loguru import logger
from pydantic import ValidationError

from sparseconv.config import Config
from sparseconv.errors import CalibrationError, SparseConvError, ValidationGateError
from sparseconv.preset_manager import preset_manager
from sparseconv.services.bench import (
    VARIANTS,
    SweepSpec,
    calibrate,
    fit_alpha,
    measured_alpha,
    parse_grid,
    read_records_csv,
    run_sweep,
)
from sparseconv.services.gsl import GslConfig, ReplayTrajectorySource, gsl_run
from sparseconv.services.perf import classify_layer, layer_cost, project_times, useful_sparsity_window
from sparseconv.services.train import DemoConfig, run_gsl_demo
from sparseconv.utils.logging import setup_logging

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION_GATE = 2
EXIT_CALIBRATION = 3


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2))


# ==================== Subcommands ====================

def cmd_calibrate(args) -> int:
    result = calibrate(
        runs=args.runs,
        tolerance=args.tolerance,
        name=args.name,
        alpha=args.alpha,
        beta=args.beta,
        threads=args.threads,
        min_seconds=args.min_seconds,
        output=args.out,
    )
    _print_json(result.profile.model_dump())
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        layers=[preset_manager.resolve_layer(text) for text in args.layer],
        densities=parse_grid(args.grid),
        batch=args.batch,
        reps=args.reps,
        warmup=args.warmup,
        threads=args.threads,
        prune_mode=args.mode,
        variants=args.variants,
        seed=args.seed,
    )
    profile = preset_manager.resolve_platform(args.profile) if args.profile else None
    result = run_sweep(spec, profile)
    paths = result.write(args.out)
    logger.info(f"[Sweep] {len(result.records)} records written to {paths['records']}")
    if "model" in paths:
        logger.info(f"[Sweep] model overlay written to {paths['model']}")
    return EXIT_OK


def cmd_project(args) -> int:
    profile = preset_manager.resolve_platform(args.profile)
    if args.alpha is not None:
        profile = profile.with_alpha(args.alpha)
    layer = preset_manager.resolve_layer(args.layer)
    options = {"count_padding": not args.no_padding, "lowered": args.lowered}
    cost = layer_cost(layer.spec, args.batch, **options)
    densities = parse_grid(args.x) if args.x else [1.0 / profile.alpha]
    _print_json({
        "layer": layer.name,
        "profile": profile.model_dump(),
        "cost": {"flops": cost.C, "activation_bytes": cost.S_A, "weight_bytes": cost.S_W},
        "class": classify_layer(layer.spec, args.batch, profile, **options).value,
        "window": useful_sparsity_window(cost, profile).to_dict(),
        "projections": [project_times(cost, x, profile).to_dict() for x in densities],
    })
    return EXIT_OK


def cmd_fit_alpha(args) -> int:
    records = read_records_csv(args.records)
    profile = preset_manager.resolve_platform(args.profile)
    fit = fit_alpha(records, profile, args.variant)
    payload = {"alpha": fit.alpha, "points": fit.points, "rounds": fit.rounds, "rms_relative_residual": fit.residual}
    try:
        payload["measured_alpha_at_dense"] = measured_alpha(records, profile, args.variant)
    except SparseConvError as e:
        logger.warning(f"[FitAlpha] no dense-point alpha: {e}")
    if args.out:
        profile.with_alpha(fit.alpha).to_json_file(args.out)
        logger.info(f"[FitAlpha] updated profile written to {args.out}")
    _print_json(payload)
    return EXIT_OK


def cmd_gsl_demo(args) -> int:
    config = DemoConfig.from_json_file(args.config) if args.config else DemoConfig()
    overrides = {
        key: value for key, value in (
            ("report_out", args.report), ("trajectory_out", args.trajectory),
            ("checkpoint_dir", args.checkpoint_dir),
        ) if value is not None
    }
    if overrides:
        config = config.model_copy(update=overrides)
    result = run_gsl_demo(config)
    _print_json({
        "dense_accuracy": result.dense_accuracy,
        "final_accuracy": result.final_accuracy,
        "sparse_accuracy": result.sparse_accuracy,
        "densities": result.densities,
        "report": result.report.model_dump(mode="json"),
    })
    return EXIT_OK


def cmd_gsl_replay(args) -> int:
    config = GslConfig(
        profile=preset_manager.resolve_platform(args.profile),
        check_period=args.check_period,
        batch=args.batch,
        manual_exclude=args.exclude or [],
        exclude_pointwise=args.exclude_pointwise,
    )
    source = ReplayTrajectorySource(args.trajectory, preset_manager.network(args.network))
    report = gsl_run(source, config)
    if args.out:
        report.write_json(args.out)
    print(report.to_json())
    return EXIT_OK


def cmd_presets(args) -> int:
    _print_json(preset_manager.list_presets())
    return EXIT_OK


# ==================== Parser ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparseconv", description=__doc__.strip())
    parser.add_argument("--log-level", default="DEBUG" if Config.DEBUG else Config.LOG_LEVEL)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="measure dense FLOP/s and streaming bandwidth")
    p.add_argument("--out", type=Path, help="profile JSON to write")
    p.add_argument("--name", default="calibrated")
    p.add_argument("--runs", type=int, default=Config.CALIBRATION_RUNS)
    p.add_argument("--tolerance", type=float, default=Config.CALIBRATION_TOLERANCE)
    p.add_argument("--alpha", type=float, default=Config.DEFAULT_ALPHA)
    p.add_argument("--beta", type=float, default=Config.DEFAULT_BETA)
    p.add_argument("--threads", type=int, default=Config.THREADS)
    p.add_argument("--min-seconds", type=float, default=Config.CALIBRATION_MIN_SECONDS)
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("sweep", help="time kernel variants over a density grid")
    p.add_argument("--layer", action="append", required=True,
                   help="layer spec 'N=..,C=..,R=..' or preset like alexnet-conv5 (repeatable)")
    p.add_argument("--grid", default="1.0:0.01:20", help="from:to:steps (geometric) or a comma list")
    p.add_argument("--batch", type=int, default=max(1, Config.THREADS))
    p.add_argument("--threads", type=int, default=Config.THREADS)
    p.add_argument("--reps", type=int, default=Config.BENCH_REPS)
    p.add_argument("--warmup", type=int, default=Config.BENCH_WARMUP)
    p.add_argument("--mode", choices=["magnitude", "random"], default="magnitude")
    p.add_argument("--variants", nargs="+", choices=sorted(VARIANTS))
    p.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    p.add_argument("--profile", help="platform preset or profile JSON; adds the model overlay")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("project", help="print model numbers for a layer")
    p.add_argument("--profile", required=True)
    p.add_argument("--layer", required=True)
    p.add_argument("--x", help="density, comma list or from:to:steps")
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--alpha", type=float)
    p.add_argument("--lowered", action="store_true", help="account the im2col replication in S_A")
    p.add_argument("--no-padding", action="store_true", help="leave zero padding out of S_A")
    p.set_defaults(handler=cmd_project)

    p = sub.add_parser("fit-alpha", help="fit alpha to measured sweep records")
    p.add_argument("--records", type=Path, required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--variant", default="sparse_direct")
    p.add_argument("--out", type=Path, help="write the profile with the fitted alpha")
    p.set_defaults(handler=cmd_fit_alpha)

    p = sub.add_parser("gsl-demo", help="train the toy net under guided sparsity learning")
    p.add_argument("--config", type=Path)
    p.add_argument("--report")
    p.add_argument("--trajectory")
    p.add_argument("--checkpoint-dir")
    p.set_defaults(handler=cmd_gsl_demo)

    p = sub.add_parser("gsl-replay", help="run the controller over a recorded density trajectory")
    p.add_argument("--trajectory", type=Path, required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--check-period", type=int, default=Config.GSL_CHECK_PERIOD)
    p.add_argument("--batch", type=int, default=1)
    p.add_argument("--exclude", nargs="+", help="layer ids excluded up front")
    p.add_argument("--exclude-pointwise", action="store_true")
    p.add_argument("--out", type=Path)
    p.set_defaults(handler=cmd_gsl_replay)

    p = sub.add_parser("presets", help="list platform and network presets")
    p.set_defaults(handler=cmd_presets)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except ValidationGateError as e:
        logger.error(str(e))
        return EXIT_VALIDATION_GATE
    except CalibrationError as e:
        logger.error(str(e))
        return EXIT_CALIBRATION
    except SparseConvError as e:
        logger.error(str(e))
        return EXIT_ERROR
    except ValidationError as e:
        logger.error(f"[CLI] invalid configuration: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
