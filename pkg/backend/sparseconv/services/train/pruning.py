"""
Magnitude pruning under GSL directives.
"""
from typing import Dict, Iterable, Literal, Mapping, Optional

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt, model_validator

from sparseconv.services.gsl.state import DirectiveKind, LayerStatus, PruneDirective
from sparseconv.services.train.toynet import ToyNet


class PruneSchedule(BaseModel):
    """
    ``density`` mode: target density follows the cubic gradual-magnitude
    curve from 1.0 to ``final_density`` between ``start`` and ``end``; each
    pass uses the magnitude quantile that meets the target.
    ``threshold`` mode: an absolute threshold ramps linearly from
    ``initial_threshold`` to ``final_threshold``.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    mode: Literal["density", "threshold"] = "density"
    start: NonNegativeInt = 0
    end: PositiveInt = 1000
    frequency: PositiveInt = 50
    final_density: float = Field(default=0.1, gt=0.0, le=1.0)
    initial_threshold: float = Field(default=0.0, ge=0.0)
    final_threshold: float = Field(default=0.05, ge=0.0)

    @model_validator(mode="after")
    def _check_range(self) -> "PruneSchedule":
        if self.end <= self.start:
            raise ValueError(f"end ({self.end}) must come after start ({self.start})")
        if self.final_threshold < self.initial_threshold:
            raise ValueError("threshold schedule must be non-decreasing")
        return self

    def progress(self, iteration: int) -> float:
        return min(1.0, max(0.0, (iteration - self.start) / float(self.end - self.start)))

    def is_pruning_step(self, iteration: int) -> bool:
        return self.start <= iteration <= self.end and (iteration - self.start) % self.frequency == 0

    def target_density(self, iteration: int) -> float:
        t = self.progress(iteration)
        return self.final_density + (1.0 - self.final_density) * (1.0 - t) ** 3

    def threshold_for(self, weights: np.ndarray, iteration: int) -> float:
        if self.mode == "threshold":
            t = self.progress(iteration)
            return self.initial_threshold + (self.final_threshold - self.initial_threshold) * t
        return magnitude_threshold(weights, self.target_density(iteration))


def magnitude_threshold(weights: np.ndarray, density: float) -> float:
    """Threshold keeping (at most) round(density * size) largest magnitudes strictly above it."""
    magnitudes = np.abs(weights).ravel()
    keep = int(round(density * magnitudes.size))
    if keep >= magnitudes.size:
        return 0.0
    cut = magnitudes.size - keep - 1
    return float(np.partition(magnitudes, cut)[cut])


def apply_directives(net: ToyNet, directives: Iterable[PruneDirective]) -> None:
    """STOP freezes the current zero pattern, RESTORE puts the dense snapshot back."""
    for directive in directives:
        name = directive.layer_id
        if directive.kind is DirectiveKind.STOP_PRUNING:
            net.status[name] = LayerStatus.STOPPED_SATURATED
            net.masks[name] = net.weights[name] != 0
        elif directive.kind is DirectiveKind.RESTORE_DENSE:
            net.status[name] = LayerStatus.RESTORED_DENSE
            net.masks[name] = None
            if directive.dense_snapshot is not None:
                snapshot = np.asarray(getattr(directive.dense_snapshot, "data", directive.dense_snapshot))
                net.weights[name] = snapshot.astype(net.weights[name].dtype).reshape(net.weights[name].shape)
            else:
                logger.warning(f"[Prune] RESTORE_DENSE for {name} carried no snapshot; weights kept")


def prune_pass(net: ToyNet, thresholds: Mapping[str, float],
               directives: Iterable[PruneDirective] = ()) -> Dict[str, float]:
    """
    Apply directives, then zero |w| <= threshold in ACTIVE layers.

    Zeros of ACTIVE and STOPPED layers stay frozen through their mask;
    EXCLUDED and RESTORED layers are left alone. Returns density per layer.
    """
    apply_directives(net, directives)
    for name in net.layer_ids:
        status = net.status[name]
        w = net.weights[name]
        if status is LayerStatus.ACTIVE and name in thresholds:
            keep = np.abs(w) > thresholds[name]
            if net.masks[name] is not None:
                keep &= net.masks[name]
            net.masks[name] = keep
            w *= keep
        elif status is LayerStatus.STOPPED_SATURATED and net.masks[name] is not None:
            w *= net.masks[name]
    return net.densities()


def apply_masks(net: ToyNet, velocity: Optional[Dict[str, np.ndarray]] = None) -> None:
    for name, mask in net.masks.items():
        if mask is None or net.status[name] not in (LayerStatus.ACTIVE, LayerStatus.STOPPED_SATURATED):
            continue
        net.weights[name] *= mask
        if velocity is not None and name in velocity:
            velocity[name] *= mask
