"""
SGD training loop of the toy net with L1 shrinkage and scheduled pruning.
"""
import math
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, NonNegativeFloat, NonNegativeInt, PositiveInt

from sparseconv.errors import TrainingDivergedError
from sparseconv.models.layer import NamedLayer
from sparseconv.services.gsl.state import LayerStatus, PruneDirective, PruneLayerState
from sparseconv.services.gsl.trajectory import TrajectoryWriter
from sparseconv.services.train.dataset import Dataset
from sparseconv.services.train.pruning import PruneSchedule, apply_directives, apply_masks, prune_pass
from sparseconv.services.train.toynet import ToyNet


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int
    learning_rate: NonNegativeFloat = 1e-3
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    # L1 strength, one value for all layers or per layer id
    l1_strength: Union[NonNegativeFloat, Dict[str, NonNegativeFloat]] = 5e-5
    batch_size: PositiveInt = 32
    max_iterations: PositiveInt = 5000
    schedule: Optional[PruneSchedule] = None
    retrain_iterations: NonNegativeInt = 0
    retrain_lr_factor: float = Field(default=0.1, gt=0.0)
    log_every: PositiveInt = 500

    def l1_for(self, layer_id: str) -> float:
        if isinstance(self.l1_strength, dict):
            return self.l1_strength.get(layer_id, 0.0)
        return self.l1_strength


class SGDMomentum:
    """Heavy-ball SGD with one velocity buffer per parameter."""

    def __init__(self, momentum: float):
        self.momentum = momentum
        self.velocity: Dict[str, np.ndarray] = {}

    def update(self, key: str, param: np.ndarray, grad: np.ndarray, lr: float) -> None:
        v = self.velocity.get(key)
        if v is None:
            v = np.zeros_like(param)
        v = self.momentum * v - lr * grad
        self.velocity[key] = v
        param += v


def soft_threshold(w: np.ndarray, amount: float) -> None:
    """In place: w <- sign(w) * max(|w| - amount, 0)."""
    np.copyto(w, np.sign(w) * np.maximum(np.abs(w) - amount, 0))


def train_step(net: ToyNet, batch: Tuple[np.ndarray, np.ndarray], config: TrainConfig,
               optimizer: Optional[SGDMomentum] = None, *,
               learning_rate: Optional[float] = None, l1: bool = True,
               iteration: int = 0) -> float:
    """
    One SGD step, then the L1 proximal step on ACTIVE layers and the frozen
    masks. Returns the mini-batch loss before the update. A zero learning
    rate leaves parameters and velocity untouched.
    """
    x, labels = batch
    lr = config.learning_rate if learning_rate is None else learning_rate
    optimizer = optimizer or SGDMomentum(config.momentum)

    loss, grads = net.loss_and_grads(x, labels)
    if not math.isfinite(loss):
        raise TrainingDivergedError(iteration, loss, {"learning_rate": lr})
    if lr == 0:
        return loss

    for name, (dw, db) in grads.items():
        optimizer.update(f"{name}.w", net.weights[name], dw, lr)
        optimizer.update(f"{name}.b", net.biases[name], db, lr)
        strength = config.l1_for(name)
        if l1 and strength > 0 and net.status[name] is LayerStatus.ACTIVE:
            soft_threshold(net.weights[name], lr * strength)
    masked_velocity = {name: optimizer.velocity[f"{name}.w"] for name in net.layer_ids
                       if f"{name}.w" in optimizer.velocity}
    apply_masks(net, masked_velocity)
    return loss


class Trainer:
    """
    Owns the optimizer, the mini-batch stream and the iteration counter.

    The main phase runs ``max_iterations`` steps with L1 and the pruning
    schedule; the optional retrain phase follows at a reduced learning rate
    with masks frozen.
    """

    def __init__(self, net: ToyNet, data: Dataset, config: TrainConfig):
        self.net = net
        self.data = data
        self.config = config
        self.optimizer = SGDMomentum(config.momentum)
        self.rng = np.random.default_rng(config.seed)
        self.iteration = 0
        self.losses: List[float] = []
        self._order = np.empty(0, dtype=np.int64)
        self._cursor = 0
        self.pruning_stopped = False

    @property
    def total_iterations(self) -> int:
        return self.config.max_iterations + self.config.retrain_iterations

    def _next_batch(self) -> Tuple[np.ndarray, np.ndarray]:
        size = min(self.config.batch_size, len(self.data))
        if self._cursor + size > self._order.size:
            self._order = self.rng.permutation(len(self.data))
            self._cursor = 0
        idx = self._order[self._cursor:self._cursor + size]
        self._cursor += size
        return self.data.images[idx], self.data.labels[idx]

    def _prune(self) -> None:
        schedule = self.config.schedule
        thresholds = {
            name: schedule.threshold_for(self.net.weights[name], self.iteration)
            for name in self.net.layer_ids if self.net.status[name] is LayerStatus.ACTIVE
        }
        densities = prune_pass(self.net, thresholds)
        logger.debug(f"[Trainer] iter {self.iteration}: prune pass {densities}")

    def step(self) -> float:
        self.iteration += 1
        main_phase = self.iteration <= self.config.max_iterations
        lr = self.config.learning_rate if main_phase else self.config.learning_rate * self.config.retrain_lr_factor
        if self.iteration == self.config.max_iterations + 1:
            logger.info(f"[Trainer] retrain phase at lr={lr:g}, masks frozen")
            self._freeze_active()
        pruning = main_phase and not self.pruning_stopped
        loss = train_step(self.net, self._next_batch(), self.config, self.optimizer,
                          learning_rate=lr, l1=pruning, iteration=self.iteration)
        self.losses.append(loss)

        schedule = self.config.schedule
        if pruning and schedule is not None and schedule.is_pruning_step(self.iteration):
            self._prune()
        if self.iteration % self.config.log_every == 0:
            logger.info(f"[Trainer] iter {self.iteration}: loss={np.mean(self.losses[-self.config.log_every:]):.4f}")
        return loss

    def stop_pruning(self) -> None:
        """No more L1 or prune passes; ACTIVE layers keep their current zeros."""
        self.pruning_stopped = True
        self._freeze_active()

    def _freeze_active(self) -> None:
        for name in self.net.layer_ids:
            if self.net.status[name] is LayerStatus.ACTIVE:
                self.net.masks[name] = self.net.weights[name] != 0

    def advance(self, steps: int) -> None:
        for _ in range(min(steps, self.total_iterations - self.iteration)):
            self.step()

    def run(self) -> List[float]:
        self.advance(self.total_iterations - self.iteration)
        return self.losses

    def accuracy(self, sparse: bool = False) -> float:
        return self.net.accuracy(self.data.images, self.data.labels, sparse=sparse)


class LiveTrainingSource:
    """
    Trajectory source that trains while the controller watches: every
    ``check_period`` iterations it yields the observed densities and applies
    the returned directives to the net.
    """

    def __init__(self, trainer: Trainer, check_period: int, writer: Optional[TrajectoryWriter] = None):
        self.trainer = trainer
        self.check_period = check_period
        self.writer = writer
        self.applied: List[PruneDirective] = []
        self._snapshots = {name: w.copy() for name, w in trainer.net.weights.items()}

    def layers(self) -> List[NamedLayer]:
        return list(self.trainer.net.layers)

    def snapshots(self) -> Mapping[str, np.ndarray]:
        return self._snapshots

    def start(self, states: List[PruneLayerState]) -> None:
        for state in states:
            if state.status is LayerStatus.EXCLUDED:
                self.trainer.net.status[state.layer_id] = LayerStatus.EXCLUDED

    def checks(self) -> Iterator[Tuple[int, Dict[str, float]]]:
        trainer = self.trainer
        while trainer.iteration < trainer.config.max_iterations:
            trainer.advance(min(self.check_period, trainer.config.max_iterations - trainer.iteration))
            if trainer.iteration % self.check_period:
                break
            densities = trainer.net.densities()
            if self.writer is not None:
                self.writer.write(trainer.iteration, densities)
            yield trainer.iteration, densities

    def apply(self, directives: List[PruneDirective]) -> None:
        apply_directives(self.trainer.net, directives)
        self.applied.extend(directives)

    def freeze(self, layer_ids: List[str]) -> None:
        logger.info(f"[Trainer] iter {self.trainer.iteration}: pruning stopped, {layer_ids} frozen")
        self.trainer.stop_pruning()

    def close(self) -> None:
        self.trainer.run()
        if self.writer is not None:
            self.writer.close()

    def final(self) -> Tuple[int, Dict[str, float]]:
        return self.trainer.iteration, self.trainer.net.densities()
