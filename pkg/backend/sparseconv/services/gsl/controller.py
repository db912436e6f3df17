"""
Guided sparsity learning controller.

Layers without speedup potential under the performance model are excluded
up front. At each periodic check an ACTIVE layer whose density reached the
bandwidth plateau stops pruning, and one that stabilized at a density too
high to beat dense gets its dense weights back.
"""
from typing import Any, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
from loguru import logger

from sparseconv.errors import GslError
from sparseconv.models.layer import LayerSpec, NamedLayer
from sparseconv.models.profile import PlatformProfile
from sparseconv.services.gsl.config import GslConfig
from sparseconv.services.gsl.report import GslReport, build_report
from sparseconv.services.gsl.state import DirectiveKind, LayerStatus, PruneDirective, PruneLayerState
from sparseconv.services.perf.cost import layer_cost
from sparseconv.services.perf.model import LayerClass, classify_layer, useful_sparsity_window

LayerLike = Union[NamedLayer, LayerSpec]


def as_named_layers(layers: Sequence[LayerLike]) -> List[NamedLayer]:
    named = []
    for i, layer in enumerate(layers):
        if isinstance(layer, LayerSpec):
            layer = NamedLayer(name=f"layer{i}", spec=layer, kind="fc" if layer.is_fc else "conv")
        named.append(layer)
    ids = [layer.name for layer in named]
    if len(set(ids)) != len(ids):
        raise GslError("duplicate layer ids", {"ids": ids})
    return named


def _snapshot_density(snapshot: Any) -> float:
    data = np.asarray(getattr(snapshot, "data", snapshot))
    return float(np.count_nonzero(data)) / data.size if data.size else 1.0


def gsl_init(layers: Sequence[LayerLike], batch: int, profile: PlatformProfile, *,
             manual_exclude: Iterable[str] = (),
             exclude_pointwise: bool = False,
             count_padding: bool = True,
             snapshots: Optional[Mapping[str, Any]] = None) -> List[PruneLayerState]:
    """Classify every layer; those without speedup potential become EXCLUDED."""
    if not layers:
        raise GslError("no layers to prune")
    named = as_named_layers(layers)
    manual = set(manual_exclude)
    unknown = manual - {layer.name for layer in named}
    if unknown:
        raise GslError(f"manual_exclude names unknown layers: {sorted(unknown)}")
    snapshots = snapshots or {}

    states = []
    for layer in named:
        cost = layer_cost(layer.spec, batch, count_padding=count_padding)
        window = useful_sparsity_window(cost, profile)
        layer_class = classify_layer(layer.spec, batch, profile, count_padding=count_padding)

        reason = None
        if layer.name in manual:
            reason = "manual"
        elif exclude_pointwise and layer.kind == "conv" and layer.spec.is_pointwise:
            reason = "pointwise"
        elif not window.has_speedup_potential:
            reason = layer_class.value

        status = LayerStatus.EXCLUDED if reason else LayerStatus.ACTIVE
        states.append(PruneLayerState(
            layer_id=layer.name,
            spec=layer.spec,
            kind=layer.kind,
            layer_class=layer_class,
            cost=cost,
            window=window,
            status=status,
            dense_snapshot=snapshots.get(layer.name) if status is LayerStatus.ACTIVE else None,
            exclusion_reason=reason,
        ))
        logger.debug(
            f"[GSL] {layer.name}: {status.value} window=({window.x_lower_useful:.4f}, "
            f"{window.x_upper_useful:.4f}) class={layer_class.value}"
        )
    return states


def gsl_step(states: Sequence[PruneLayerState], iteration: int,
             observed: Mapping[str, float], config: GslConfig) -> List[PruneDirective]:
    """
    Apply the three rules to every ACTIVE layer with an observation.

    x <= x_lower_useful stops pruning; a density stabilized at
    x >= x_upper_useful restores the dense weights; anything else continues.
    Layers that are not ACTIVE get no directive.
    """
    if iteration < 0 or iteration % config.check_period:
        raise GslError(f"iteration {iteration} is not a multiple of check_period {config.check_period}")
    by_id = {state.layer_id: state for state in states}
    unknown = [layer_id for layer_id in observed if layer_id not in by_id]
    if unknown:
        raise GslError(f"unknown layer ids {unknown}", {"iteration": iteration})

    directives = []
    for state in states:
        if state.layer_id not in observed:
            continue
        x = float(observed[state.layer_id])
        if not (0.0 <= x <= 1.0):
            raise GslError(f"density {x} of {state.layer_id} outside [0, 1]", {"iteration": iteration})
        if state.status is LayerStatus.EXCLUDED:
            state.final_density = x
            continue
        state.trajectory.append((iteration, x))
        state.final_density = x
        if state.status is not LayerStatus.ACTIVE:
            continue

        if x <= state.window.x_lower_useful:
            state.transition(LayerStatus.STOPPED_SATURATED)
            state.dense_snapshot = None
            directives.append(PruneDirective(state.layer_id, DirectiveKind.STOP_PRUNING, iteration, x))
            logger.info(f"[GSL] iter {iteration}: stop pruning {state.layer_id} at x={x:.4f}")
        elif x >= state.window.x_upper_useful and \
                state.is_stabilized(config.stabilization_window, config.stabilization_epsilon):
            state.transition(LayerStatus.RESTORED_DENSE)
            snapshot, state.dense_snapshot = state.dense_snapshot, None
            state.snapshot_applied = True
            if snapshot is not None:
                state.final_density = _snapshot_density(snapshot)
            else:
                state.final_density = 1.0
            directives.append(PruneDirective(
                state.layer_id, DirectiveKind.RESTORE_DENSE, iteration, x, dense_snapshot=snapshot,
            ))
            logger.info(f"[GSL] iter {iteration}: restore dense weights of {state.layer_id} (stable at x={x:.4f})")
        else:
            directives.append(PruneDirective(state.layer_id, DirectiveKind.CONTINUE, iteration, x))
    return directives


class GuidedSparsityController:
    """Holds the layer states of one pruning run."""

    def __init__(self, layers: Sequence[LayerLike], config: GslConfig,
                 snapshots: Optional[Mapping[str, Any]] = None):
        self.config = config
        self.states = gsl_init(
            layers, config.batch, config.profile,
            manual_exclude=config.manual_exclude,
            exclude_pointwise=config.exclude_pointwise,
            count_padding=config.count_padding,
            snapshots=snapshots,
        )
        self.last_iteration = 0
        excluded = [s.layer_id for s in self.states if s.status is LayerStatus.EXCLUDED]
        logger.info(f"[GSL] {len(self.states)} layers, excluded: {excluded or 'none'}")

    def state(self, layer_id: str) -> PruneLayerState:
        for state in self.states:
            if state.layer_id == layer_id:
                return state
        raise GslError(f"unknown layer id '{layer_id}'")

    @property
    def active(self) -> List[str]:
        return [s.layer_id for s in self.states if s.status is LayerStatus.ACTIVE]

    @property
    def converged(self) -> bool:
        return not self.active

    def step(self, iteration: int, observed: Mapping[str, float]) -> List[PruneDirective]:
        directives = gsl_step(self.states, iteration, observed, self.config)
        self.last_iteration = iteration
        return directives

    def run(self, source) -> GslReport:
        """
        Feed the checks of ``source`` through step, applying directives as
        they come. When ``max_iterations`` cuts the run short, ACTIVE layers
        are frozen before the source finishes; the densities the source
        finishes with are then settled into the states.
        """
        source.start(self.states)
        limit = self.config.max_iterations
        limited = False
        for iteration, observed in source.checks():
            if limit is not None and iteration > limit:
                limited = True
                break
            source.apply(self.step(iteration, observed))
            if self.converged:
                logger.info(f"[GSL] converged at iteration {iteration}")
                break
            if limit is not None and iteration + self.config.check_period > limit:
                limited = True
                break
        if limited and self.active:
            logger.info(f"[GSL] iteration limit {limit} reached, freezing {self.active}")
            source.freeze(self.active)
        source.close()
        final = source.final()
        if final is not None:
            self.settle(*final)
        return self.report()

    def settle(self, iteration: int, densities: Mapping[str, float]) -> None:
        """
        Record the densities of the finished network. An ACTIVE layer that
        ended at or below x_lower_useful without a check stops there.
        """
        for state in self.states:
            if state.layer_id not in densities:
                continue
            x = float(densities[state.layer_id])
            state.final_density = x
            if state.status is LayerStatus.EXCLUDED:
                continue
            if not state.trajectory or state.trajectory[-1][0] < iteration:
                state.trajectory.append((iteration, x))
            if state.status is LayerStatus.ACTIVE and x <= state.window.x_lower_useful:
                logger.warning(f"[GSL] {state.layer_id} finished at x={x:.4f} below x_lower without a check")
                state.transition(LayerStatus.STOPPED_SATURATED)
                state.dense_snapshot = None

    def report(self) -> GslReport:
        return build_report(self.states, self.config.profile, self.last_iteration)


def gsl_run(source, config: GslConfig) -> GslReport:
    """
    Drive the controller from a trajectory source until it runs out of
    checks, reaches ``max_iterations`` or has no ACTIVE layer left.

    ``source`` provides ``layers()``, ``snapshots()``, ``start(states)``,
    ``checks()`` yielding (iteration, {layer_id: density}), ``apply(directives)``,
    ``freeze(layer_ids)``, ``close()`` and ``final()`` returning the finished
    (iteration, densities) or None.
    """
    layers = source.layers()
    if not layers:
        source.close()
        logger.info("[GSL] empty scope, nothing to prune")
        return GslReport.empty(config.profile.name)

    return GuidedSparsityController(layers, config, source.snapshots()).run(source)
