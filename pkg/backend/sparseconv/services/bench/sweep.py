"""
Sparsity sweeps: synthetic pruned weights, correctness gate, timing and
the model overlay.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, field_validator

from sparseconv.config import Config
from sparseconv.errors import GeometryError, ValidationGateError
from sparseconv.models.layer import NamedLayer
from sparseconv.models.profile import PlatformProfile
from sparseconv.services.bench.records import BenchRecord, write_records_csv
from sparseconv.services.bench.timing import time_callable
from sparseconv.services.bench.variants import BASELINE, KernelVariant, Workload, variants_for
from sparseconv.services.conv.threads import thread_count
from sparseconv.services.perf.cost import layer_cost
from sparseconv.services.perf.model import project_times

GATE_RTOL = 1e-4


def geometric_grid(start: float, stop: float, steps: int) -> List[float]:
    """``steps`` densities from ``start`` to ``stop`` spaced evenly in log."""
    if steps < 1 or not (0 < stop <= 1) or not (0 < start <= 1):
        raise GeometryError(f"bad density grid {start}:{stop}:{steps}")
    if steps == 1:
        return [float(start)]
    return [float(x) for x in np.geomspace(start, stop, steps)]


def parse_grid(text: str) -> List[float]:
    """``"1.0:0.01:20"`` or a comma list ``"1.0,0.1,0.05"``."""
    try:
        if ":" in text:
            start, stop, steps = text.split(":")
            return geometric_grid(float(start), float(stop), int(steps))
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise GeometryError(f"cannot parse density grid '{text}'") from None


class SweepSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    layers: List[NamedLayer]
    densities: List[float] = Field(default_factory=lambda: geometric_grid(1.0, 0.01, 20))
    batch: PositiveInt = Field(default_factory=lambda: max(1, Config.THREADS))
    reps: int = Field(default=Config.BENCH_REPS, ge=3)
    warmup: NonNegativeInt = Config.BENCH_WARMUP
    threads: PositiveInt = Field(default_factory=lambda: max(1, Config.THREADS))
    prune_mode: Literal["magnitude", "random"] = "magnitude"
    variants: Optional[List[str]] = None
    seed: int = Config.DEFAULT_SEED
    min_sample_seconds: float = Field(default=Config.BENCH_MIN_SAMPLE_SECONDS, gt=0)

    @field_validator("densities")
    @classmethod
    def _check_densities(cls, value: List[float]) -> List[float]:
        if not value or any(not (0.0 < x <= 1.0) for x in value):
            raise ValueError("densities must be non-empty and lie in (0, 1]")
        return value


@dataclass
class SweepResult:
    records: List[BenchRecord] = field(default_factory=list)
    model_records: List[BenchRecord] = field(default_factory=list)

    def write(self, path: Union[str, Path]) -> Dict[str, Path]:
        """Measured records to ``path``; the model overlay, when present, next to it as ``<stem>.model.csv``."""
        path = Path(path)
        written = {"records": write_records_csv(path, self.records)}
        if self.model_records:
            written["model"] = write_records_csv(path.with_suffix(".model.csv"), self.model_records)
        return written


def synthetic_weights(shape, density: float, rng: np.random.Generator,
                      mode: str = "magnitude") -> np.ndarray:
    """
    Gaussian weights with exactly max(1, round(density * size)) non-zeros.

    ``magnitude`` keeps the largest magnitudes (ties broken by index);
    ``random`` keeps a uniformly random subset.
    """
    weights = rng.standard_normal(shape).astype(np.float32)
    flat = weights.reshape(-1)
    keep = max(1, int(round(density * flat.size)))
    if mode == "magnitude":
        order = np.argsort(-np.abs(flat), kind="stable")
    elif mode == "random":
        order = rng.permutation(flat.size)
    else:
        raise ValueError(f"unknown prune mode '{mode}'")
    mask = np.zeros(flat.size, dtype=bool)
    mask[order[:keep]] = True
    flat[~mask] = 0.0
    # a Gaussian draw can be exactly 0.0; keep the count exact
    flat[mask & (flat == 0.0)] = np.float32(1e-3)
    return weights


def _workload(layer: NamedLayer, weights: np.ndarray, inputs: np.ndarray, density: float) -> Workload:
    if layer.kind == "fc":
        weights = weights.reshape(layer.spec.N, layer.spec.C)
    return Workload(layer=layer, weights=weights, inputs=inputs, density=density)


def _inputs_for(layer: NamedLayer, batch: int, rng: np.random.Generator) -> np.ndarray:
    if layer.kind == "fc":
        return rng.standard_normal((layer.spec.C, batch)).astype(np.float32)
    return rng.standard_normal((batch, *layer.spec.input_shape)).astype(np.float32)


def check_against_oracle(variant: KernelVariant, expected: np.ndarray, layer: str,
                         rtol: float = GATE_RTOL) -> float:
    """Max absolute error; raises ValidationGateError beyond rtol scaled by the output magnitude."""
    got = variant.run()
    error = float(np.max(np.abs(got - expected))) if expected.size else 0.0
    scale = max(1.0, float(np.max(np.abs(expected))))
    if not np.isfinite(error) or error > rtol * scale:
        raise ValidationGateError(variant.name, layer, error)
    return error


def _record(layer: NamedLayer, variant: str, x: float, spec: SweepSpec, seconds: float,
            baseline_seconds: float, cost) -> BenchRecord:
    return BenchRecord(
        layer=layer.name,
        variant=variant,
        x=x,
        batch=spec.batch,
        threads=spec.threads,
        median_seconds=seconds,
        effective_flops=cost.C / seconds,
        speedup_vs_dense=baseline_seconds / seconds,
        flops=cost.C,
        activation_bytes=cost.S_A,
        weight_bytes=cost.S_W,
    )


def model_overlay(layer: NamedLayer, batch: int, profile: PlatformProfile,
                  densities: List[float], threads: int = 1) -> List[BenchRecord]:
    """Model-predicted records (variant ``model``) on the same cost accounting."""
    cost = layer_cost(layer.spec, batch)
    records = []
    for x in densities:
        p = project_times(cost, x, profile)
        records.append(BenchRecord(
            layer=layer.name, variant="model", x=x, batch=batch, threads=threads,
            median_seconds=p.t_sparse, effective_flops=p.effective_flops, speedup_vs_dense=p.speedup,
            flops=cost.C, activation_bytes=cost.S_A, weight_bytes=cost.S_W,
        ))
    return records


def run_sweep(spec: SweepSpec, profile: Optional[PlatformProfile] = None) -> SweepResult:
    """
    For every layer: time the dense baselines once, then every sparse
    variant at every grid density. Each variant passes the oracle check on
    its first workload before it is timed.
    """
    rng = np.random.default_rng(spec.seed)
    result = SweepResult()

    with thread_count(spec.threads):
        for layer in spec.layers:
            cost = layer_cost(layer.spec, spec.batch)
            inputs = _inputs_for(layer, spec.batch, rng)
            variants = variants_for(layer.kind, spec.variants)
            baseline = variants_for(layer.kind, [BASELINE[layer.kind]])[0]
            dense_variants = [v for v in variants if not v.is_sparse and v.name != baseline.name]
            sparse_variants = [v for v in variants if v.is_sparse]

            first = synthetic_weights(layer.spec.weight_shape, spec.densities[0], rng, spec.prune_mode)
            baseline.prepare(_workload(layer, first, inputs, spec.densities[0]))
            expected = baseline.run()
            t_base = time_callable(baseline.run, spec.reps, spec.warmup, spec.min_sample_seconds).median_seconds
            logger.info(f"[Sweep] {layer.name}: {baseline.name} {t_base * 1e3:.3f} ms")
            if spec.variants is None or baseline.name in spec.variants:
                result.records.append(_record(layer, baseline.name, 1.0, spec, t_base, t_base, cost))

            for variant in dense_variants:
                variant.prepare(_workload(layer, first, inputs, spec.densities[0]))
                check_against_oracle(variant, expected, layer.name)
                t = time_callable(variant.run, spec.reps, spec.warmup, spec.min_sample_seconds).median_seconds
                result.records.append(_record(layer, variant.name, 1.0, spec, t, t_base, cost))

            for i, x in enumerate(spec.densities):
                weights = first if i == 0 else synthetic_weights(layer.spec.weight_shape, x, rng, spec.prune_mode)
                workload = _workload(layer, weights, inputs, x)
                for variant in sparse_variants:
                    variant.prepare(workload)
                    if i == 0:
                        check_against_oracle(variant, expected, layer.name)
                    t = time_callable(variant.run, spec.reps, spec.warmup, spec.min_sample_seconds).median_seconds
                    result.records.append(_record(layer, variant.name, x, spec, t, t_base, cost))
                    logger.info(f"[Sweep] {layer.name} x={x:.4f} {variant.name}: {t * 1e3:.3f} ms "
                                f"({t_base / t:.2f}x vs {baseline.name})")

            if profile is not None:
                result.model_records.extend(model_overlay(layer, spec.batch, profile, spec.densities, spec.threads))
    return result
