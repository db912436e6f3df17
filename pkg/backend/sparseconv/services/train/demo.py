"""
End-to-end GSL run on the toy net: dense pretraining, then guided pruning.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, PositiveInt

from sparseconv.config import Config
from sparseconv.models.profile import PlatformProfile
from sparseconv.preset_manager import preset_manager
from sparseconv.services.gsl.config import GslConfig
from sparseconv.services.gsl.controller import gsl_run
from sparseconv.services.gsl.report import GslReport
from sparseconv.services.gsl.trajectory import TrajectoryWriter
from sparseconv.services.train.checkpoint import save_checkpoint
from sparseconv.services.train.dataset import synth_dataset
from sparseconv.services.train.pruning import PruneSchedule
from sparseconv.services.train.toynet import ToyNet
from sparseconv.services.train.trainer import LiveTrainingSource, TrainConfig, Trainer


def _default_prune_train() -> TrainConfig:
    return TrainConfig(
        seed=Config.DEFAULT_SEED,
        learning_rate=0.01,
        max_iterations=2000,
        retrain_iterations=300,
        schedule=PruneSchedule(mode="density", start=0, end=1200, frequency=50, final_density=0.1),
    )


class DemoConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Config.DEFAULT_SEED
    samples: PositiveInt = 512
    classes: PositiveInt = 4
    channels: List[PositiveInt] = Field(default_factory=lambda: [8, 16])
    pretrain_iterations: NonNegativeInt = 5000
    pretrain_learning_rate: float = Field(default=0.01, gt=0)
    train: TrainConfig = Field(default_factory=_default_prune_train)
    # preset name or an inline profile
    profile: Union[str, PlatformProfile] = "Atom"
    check_period: PositiveInt = 100
    stabilization_window: PositiveInt = Config.GSL_STABILIZATION_WINDOW
    stabilization_epsilon: float = Field(default=Config.GSL_STABILIZATION_EPSILON, gt=0)
    batch: PositiveInt = 1
    manual_exclude: List[str] = Field(default_factory=list)
    exclude_pointwise: bool = False
    trajectory_out: Optional[str] = None
    report_out: Optional[str] = None
    checkpoint_dir: Optional[str] = None

    @classmethod
    def from_json_file(cls, path: Union[str, Path]) -> "DemoConfig":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    def resolve_profile(self) -> PlatformProfile:
        if isinstance(self.profile, PlatformProfile):
            return self.profile
        return preset_manager.resolve_platform(self.profile)

    def gsl_config(self) -> GslConfig:
        return GslConfig(
            profile=self.resolve_profile(),
            check_period=self.check_period,
            stabilization_window=self.stabilization_window,
            stabilization_epsilon=self.stabilization_epsilon,
            batch=self.batch,
            manual_exclude=self.manual_exclude,
            exclude_pointwise=self.exclude_pointwise,
        )


@dataclass
class DemoResult:
    report: GslReport
    dense_accuracy: float
    final_accuracy: float
    sparse_accuracy: float
    densities: Dict[str, float]
    net: ToyNet


def run_gsl_demo(config: DemoConfig) -> DemoResult:
    data = synth_dataset(config.seed, config.samples, config.classes)
    net = ToyNet.create(config.seed, classes=config.classes, channels=config.channels)
    logger.info(f"[Demo] toy net with {net.parameter_count()} parameters, {len(data)} samples")

    pretrain = TrainConfig(
        seed=config.seed,
        learning_rate=config.pretrain_learning_rate,
        momentum=config.train.momentum,
        l1_strength=0.0,
        batch_size=config.train.batch_size,
        max_iterations=max(config.pretrain_iterations, 1),
    )
    dense_trainer = Trainer(net, data, pretrain)
    if config.pretrain_iterations:
        dense_trainer.run()
    dense_accuracy = dense_trainer.accuracy()
    logger.info(f"[Demo] dense train accuracy {dense_accuracy:.3f}")

    gsl = config.gsl_config()
    writer = TrajectoryWriter(config.trajectory_out) if config.trajectory_out else None
    source = LiveTrainingSource(Trainer(net, data, config.train), gsl.check_period, writer)
    report = gsl_run(source, gsl)

    final_accuracy = net.accuracy(data.images, data.labels)
    sparse_accuracy = net.accuracy(data.images, data.labels, sparse=True)
    logger.info(
        f"[Demo] final accuracy {final_accuracy:.3f} (sparse kernels {sparse_accuracy:.3f}), "
        f"projected net speedup {report.net_speedup:.2f}x"
    )
    if config.report_out:
        report.write_json(config.report_out)
    if config.checkpoint_dir:
        save_checkpoint(net, config.checkpoint_dir)

    return DemoResult(
        report=report,
        dense_accuracy=dense_accuracy,
        final_accuracy=final_accuracy,
        sparse_accuracy=sparse_accuracy,
        densities=net.densities(),
        net=net,
    )
