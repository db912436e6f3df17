"""
Analytical performance model.
"""
from .cost import layer_cost, lowering_replication
from .model import (
    LayerClass,
    ProjectedTimes,
    alpha_from_actual_flops,
    classify_layer,
    crossover_density,
    network_speedup,
    project_times,
    projection_curve,
    structured_break_even_density,
    useful_sparsity_window,
)

__all__ = [
    "layer_cost",
    "lowering_replication",
    "LayerClass",
    "ProjectedTimes",
    "project_times",
    "projection_curve",
    "crossover_density",
    "useful_sparsity_window",
    "classify_layer",
    "network_speedup",
    "alpha_from_actual_flops",
    "structured_break_even_density",
]
