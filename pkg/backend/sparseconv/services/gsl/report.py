"""
Result document of a GSL run.
"""
import json
from pathlib import Path
from typing import List, Optional, Sequence, Union

from pydantic import BaseModel, Field

from sparseconv.models.profile import PlatformProfile
from sparseconv.services.gsl.state import LayerStatus, PruneLayerState
from sparseconv.services.perf.model import network_speedup, project_times


class WindowReport(BaseModel):
    x_lower_useful: float
    x_upper_useful: float
    has_speedup_potential: bool


class GslLayerReport(BaseModel):
    id: str
    status: LayerStatus
    layer_class: str
    final_density: float
    window: WindowReport
    projected_speedup: float
    t_dense: float
    exclusion_reason: Optional[str] = None


class GslReport(BaseModel):
    profile: str
    iterations: int = 0
    layers: List[GslLayerReport] = Field(default_factory=list)
    net_speedup: float = 1.0

    @classmethod
    def empty(cls, profile: str) -> "GslReport":
        return cls(profile=profile)

    def layer(self, layer_id: str) -> GslLayerReport:
        for entry in self.layers:
            if entry.id == layer_id:
                return entry
        raise KeyError(layer_id)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2)

    def write_json(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


def effective_density(state: PruneLayerState) -> float:
    """Final density floored at one non-zero, so a fully pruned layer still projects."""
    N, C, R, S = state.spec.weight_shape
    return max(state.final_density, 1.0 / (N * C * R * S))


def runs_sparse(state: PruneLayerState) -> bool:
    """ACTIVE layers count as sparse only once observed below x_upper_useful."""
    if state.status is LayerStatus.STOPPED_SATURATED:
        return True
    if state.status is not LayerStatus.ACTIVE or not state.trajectory:
        return False
    return state.final_density < state.window.x_upper_useful


def build_report(states: Sequence[PruneLayerState], profile: PlatformProfile, iterations: int) -> GslReport:
    entries = []
    times = []
    for state in states:
        t_dense = state.cost.C / profile.F
        if runs_sparse(state):
            speedup = project_times(state.cost, effective_density(state), profile).speedup
        else:
            speedup = 1.0
        times.append((t_dense, t_dense / speedup))
        entries.append(GslLayerReport(
            id=state.layer_id,
            status=state.status,
            layer_class=state.layer_class.value,
            final_density=state.final_density,
            window=WindowReport(**state.window.to_dict()),
            projected_speedup=speedup,
            t_dense=t_dense,
            exclusion_reason=state.exclusion_reason,
        ))
    return GslReport(
        profile=profile.name,
        iterations=iterations,
        layers=entries,
        net_speedup=network_speedup(times),
    )
