"""
Guided sparsity learning.
"""
from .config import GslConfig
from .controller import GuidedSparsityController, as_named_layers, gsl_init, gsl_run, gsl_step
from .report import GslLayerReport, GslReport, build_report
from .state import DirectiveKind, LayerStatus, PruneDirective, PruneLayerState, TRANSITIONS
from .trajectory import ReplayTrajectorySource, TrajectoryRow, TrajectoryWriter, read_trajectory, write_trajectory

__all__ = [
    "GslConfig",
    "GuidedSparsityController",
    "as_named_layers",
    "gsl_init",
    "gsl_step",
    "gsl_run",
    "GslReport",
    "GslLayerReport",
    "build_report",
    "DirectiveKind",
    "LayerStatus",
    "PruneDirective",
    "PruneLayerState",
    "TRANSITIONS",
    "ReplayTrajectorySource",
    "TrajectoryRow",
    "TrajectoryWriter",
    "read_trajectory",
    "write_trajectory",
]
