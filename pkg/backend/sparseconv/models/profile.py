"""
Platform profile and the cost / window records of the performance model.
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from pydantic import BaseModel, ConfigDict, Field

from sparseconv.config import Config


class PlatformProfile(BaseModel):
    """Achievable dense compute rate, memory bandwidth and sparse overheads."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "custom"
    flops: float = Field(gt=0, description="Achievable dense FLOP/s (F)")
    bandwidth: float = Field(gt=0, description="Achievable memory bandwidth in B/s (B)")
    alpha: float = Field(default=Config.DEFAULT_ALPHA, ge=1.0, description="Sparse compute overhead")
    beta: float = Field(default=Config.DEFAULT_BETA, ge=1.0, description="Sparse storage overhead")

    @property
    def F(self) -> float:
        return self.flops

    @property
    def B(self) -> float:
        return self.bandwidth

    def with_alpha(self, alpha: float) -> "PlatformProfile":
        return PlatformProfile(**{**self.model_dump(), "alpha": alpha})

    @classmethod
    def from_json_file(cls, path: Union[str, Path]) -> "PlatformProfile":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def to_json_file(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.model_dump(), indent=2), encoding="utf-8")


@dataclass(frozen=True)
class LayerCost:
    """FLOPs and bytes of a layer, all without considering sparsity."""
    flops: float
    activation_bytes: float
    weight_bytes: float

    @property
    def C(self) -> float:
        return self.flops

    @property
    def S_A(self) -> float:
        return self.activation_bytes

    @property
    def S_W(self) -> float:
        return self.weight_bytes


@dataclass(frozen=True)
class SparsityWindow:
    """
    Useful density range of a layer, in density x (fraction of non-zeros).

    ``x_lower_useful`` is where the layer turns bandwidth bound (no further
    speedup below it); ``x_upper_useful`` is where sparse becomes slower
    than dense. In sparsity terms these are the upper and lower bounds of
    useful sparsity respectively.
    """
    x_lower_useful: float
    x_upper_useful: float
    has_speedup_potential: bool

    def to_dict(self) -> dict:
        return {
            "x_lower_useful": self.x_lower_useful,
            "x_upper_useful": self.x_upper_useful,
            "has_speedup_potential": self.has_speedup_potential,
        }
