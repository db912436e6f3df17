"""
Per-layer pruning state and the directives the controller emits.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, List, Optional, Tuple

from sparseconv.models.layer import LayerSpec
from sparseconv.models.profile import LayerCost, SparsityWindow
from sparseconv.services.perf.model import LayerClass


class LayerStatus(str, Enum):
    EXCLUDED = "EXCLUDED"
    ACTIVE = "ACTIVE"
    STOPPED_SATURATED = "STOPPED_SATURATED"
    RESTORED_DENSE = "RESTORED_DENSE"


class DirectiveKind(str, Enum):
    STOP_PRUNING = "STOP_PRUNING"
    RESTORE_DENSE = "RESTORE_DENSE"
    CONTINUE = "CONTINUE"


# EXCLUDED is terminal from initialization; ACTIVE leaves at most once
TRANSITIONS = {
    LayerStatus.ACTIVE: {LayerStatus.STOPPED_SATURATED, LayerStatus.RESTORED_DENSE},
    LayerStatus.EXCLUDED: set(),
    LayerStatus.STOPPED_SATURATED: set(),
    LayerStatus.RESTORED_DENSE: set(),
}


@dataclass(frozen=True)
class PruneDirective:
    layer_id: str
    kind: DirectiveKind
    iteration: int
    density: float
    # dense weights to put back; only set on RESTORE_DENSE
    dense_snapshot: Optional[Any] = None


@dataclass
class PruneLayerState:
    layer_id: str
    spec: LayerSpec
    kind: str
    layer_class: LayerClass
    cost: LayerCost
    window: SparsityWindow
    status: LayerStatus
    trajectory: List[Tuple[int, float]] = field(default_factory=list)
    dense_snapshot: Optional[Any] = None
    snapshot_applied: bool = False
    exclusion_reason: Optional[str] = None
    final_density: float = 1.0

    def transition(self, status: LayerStatus) -> None:
        if status not in TRANSITIONS[self.status]:
            raise ValueError(f"illegal transition {self.status.value} -> {status.value} for {self.layer_id}")
        self.status = status

    def densities(self) -> List[float]:
        return [x for _, x in self.trajectory]

    def is_stabilized(self, window: int, epsilon: float) -> bool:
        """The last ``window + 1`` densities span less than ``epsilon``."""
        if len(self.trajectory) < window + 1:
            return False
        recent = self.densities()[-(window + 1):]
        return max(recent) - min(recent) < epsilon
