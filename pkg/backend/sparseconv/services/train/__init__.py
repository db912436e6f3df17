"""
Desk-scale training that exercises guided sparsity learning end to end.
"""
from .checkpoint import load_checkpoint, save_checkpoint
from .dataset import Dataset, synth_dataset
from .demo import DemoConfig, DemoResult, run_gsl_demo
from .pruning import PruneSchedule, apply_directives, magnitude_threshold, prune_pass
from .toynet import ToyNet, toynet_layers
from .trainer import LiveTrainingSource, SGDMomentum, TrainConfig, Trainer, train_step

__all__ = [
    "Dataset",
    "synth_dataset",
    "ToyNet",
    "toynet_layers",
    "TrainConfig",
    "Trainer",
    "SGDMomentum",
    "train_step",
    "LiveTrainingSource",
    "PruneSchedule",
    "prune_pass",
    "apply_directives",
    "magnitude_threshold",
    "save_checkpoint",
    "load_checkpoint",
    "DemoConfig",
    "DemoResult",
    "run_gsl_demo",
]
