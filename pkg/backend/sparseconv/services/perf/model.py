"""
Roofline-style projection of sparse against dense layer time.

t_dense = C/F, t_sparse_compute = alpha*x*C/F, t_sparse_bw = (S_A + beta*x*S_W)/B,
speedup = t_dense / max(t_sparse_compute, t_sparse_bw).
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Sequence, Tuple

from sparseconv.errors import ModelInputError
from sparseconv.models.layer import LayerSpec
from sparseconv.models.profile import LayerCost, PlatformProfile, SparsityWindow
from sparseconv.services.perf.cost import layer_cost


class LayerClass(str, Enum):
    PRUNABLE_FOR_SPEED = "PRUNABLE_FOR_SPEED"
    BANDWIDTH_BOUND_ALWAYS = "BANDWIDTH_BOUND_ALWAYS"
    NO_BENEFIT = "NO_BENEFIT"


@dataclass(frozen=True)
class ProjectedTimes:
    x: float
    t_dense: float
    t_sparse_compute: float
    t_sparse_bw: float
    t_sparse: float
    speedup: float
    effective_flops: float

    @property
    def compute_bound(self) -> bool:
        return self.t_sparse_compute >= self.t_sparse_bw

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "t_dense": self.t_dense,
            "t_sparse_compute": self.t_sparse_compute,
            "t_sparse_bw": self.t_sparse_bw,
            "t_sparse": self.t_sparse,
            "speedup": self.speedup,
            "effective_flops": self.effective_flops,
        }


def _check_cost(cost: LayerCost) -> None:
    if not (cost.C > 0 and cost.S_A > 0 and cost.S_W > 0):
        raise ModelInputError("layer cost terms must be positive", {"cost": cost})


def project_times(cost: LayerCost, x: float, profile: PlatformProfile) -> ProjectedTimes:
    if not (0.0 < x <= 1.0):
        raise ModelInputError(f"density x must lie in (0, 1], got {x}")
    _check_cost(cost)
    t_dense = cost.C / profile.F
    t_compute = profile.alpha * x * cost.C / profile.F
    t_bw = (cost.S_A + profile.beta * x * cost.S_W) / profile.B
    t_sparse = max(t_compute, t_bw)
    return ProjectedTimes(
        x=x,
        t_dense=t_dense,
        t_sparse_compute=t_compute,
        t_sparse_bw=t_bw,
        t_sparse=t_sparse,
        speedup=t_dense / t_sparse,
        effective_flops=cost.C / t_sparse,
    )


def projection_curve(cost: LayerCost, profile: PlatformProfile,
                     densities: Iterable[float]) -> List[ProjectedTimes]:
    return [project_times(cost, float(x), profile) for x in densities]


def crossover_density(cost: LayerCost, profile: PlatformProfile) -> float:
    """
    Density where t_sparse_compute = t_sparse_bw, or +inf when the sparse
    kernel is bandwidth bound at every density.
    """
    _check_cost(cost)
    denominator = profile.alpha * cost.C * profile.B / profile.F - profile.beta * cost.S_W
    if denominator <= 0:
        return math.inf
    return cost.S_A / denominator


def useful_sparsity_window(cost: LayerCost, profile: PlatformProfile) -> SparsityWindow:
    """
    Densities in (x_lower_useful, x_upper_useful) are compute bound and faster
    than dense; below x_lower_useful the speedup plateaus. Without speedup
    potential, x_lower_useful is the crossover clamped to 1.
    """
    x_star = crossover_density(cost, profile)
    x_upper = 1.0 / profile.alpha
    return SparsityWindow(
        x_lower_useful=min(x_star, 1.0),
        x_upper_useful=x_upper,
        has_speedup_potential=x_star < x_upper,
    )


def classify_layer(spec: LayerSpec, batch: int, profile: PlatformProfile, **cost_options) -> LayerClass:
    x_star = crossover_density(layer_cost(spec, batch, **cost_options), profile)
    if x_star < 1.0 / profile.alpha:
        return LayerClass.PRUNABLE_FOR_SPEED
    if x_star >= 1.0:
        return LayerClass.BANDWIDTH_BOUND_ALWAYS
    return LayerClass.NO_BENEFIT


def network_speedup(times: Sequence[Tuple[float, float]]) -> float:
    """Sum of dense times over sum of run times for (t_dense, t_run) pairs; 1.0 when empty."""
    if not times:
        return 1.0
    dense = sum(t for t, _ in times)
    run = sum(t for _, t in times)
    return dense / run


def alpha_from_actual_flops(flops: float, actual_flops: float) -> float:
    """Alpha of a compute-bound sparse run: dense peak over the FLOP/s actually executed."""
    if flops <= 0 or actual_flops <= 0:
        raise ModelInputError("FLOP rates must be positive")
    return flops / actual_flops


def structured_break_even_density(x: float, alpha: float, alpha_group: float = 1.0) -> float:
    """
    Group-sparse density that matches element-wise density ``x`` in time.

    Group sparsity with overhead ``alpha_group`` only wins when its density
    is below (alpha / alpha_group) * x.
    """
    if not (0.0 < x <= 1.0):
        raise ModelInputError(f"density x must lie in (0, 1], got {x}")
    if alpha < 1.0 or alpha_group < 1.0:
        raise ModelInputError("overheads must be >= 1")
    return min(1.0, alpha / alpha_group * x)
