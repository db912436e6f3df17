"""
Roofline projection, useful sparsity window and layer classification.
"""
import math

import numpy as np
import pytest

from sparseconv.errors import ModelInputError
from sparseconv.models.layer import LayerSpec
from sparseconv.models.profile import LayerCost, PlatformProfile
from sparseconv.services.perf import (
    LayerClass,
    alpha_from_actual_flops,
    classify_layer,
    crossover_density,
    layer_cost,
    lowering_replication,
    network_speedup,
    project_times,
    projection_curve,
    structured_break_even_density,
    useful_sparsity_window,
)


@pytest.mark.unit
class TestLayerCost:
    def test_conv5_accounting(self, conv5):
        cost = layer_cost(conv5)
        assert cost.C == 2 * 256 * 384 * 9 * 169
        assert cost.S_A == 4 * (384 * 15 * 15 + 256 * 13 * 13)
        assert cost.S_W == 4 * 256 * 384 * 9

    def test_unpadded_input(self, conv5):
        assert layer_cost(conv5, count_padding=False).S_A == 4 * (384 * 169 + 256 * 169)

    def test_doubling_batch(self, conv5):
        one, two = layer_cost(conv5, 1), layer_cost(conv5, 2)
        assert two.C == 2 * one.C
        assert two.S_A == 2 * one.S_A
        assert two.S_W == one.S_W
        assert layer_cost(conv5, 2, reload_weights_per_image=True).S_W == 2 * one.S_W

    def test_lowered_replication(self, conv5):
        assert lowering_replication(conv5) == pytest.approx(9.0)
        lowered = layer_cost(conv5, lowered=True)
        assert lowered.S_A == pytest.approx(4 * (384 * 169 * 9 + 256 * 169))

    def test_invalid_batch(self, conv5):
        with pytest.raises(ModelInputError):
            layer_cost(conv5, 0)


@pytest.mark.unit
class TestProjection:
    def test_dense_density_costs_alpha(self, conv5, bdw):
        p = project_times(layer_cost(conv5), 1.0, bdw)
        assert p.compute_bound
        assert p.speedup == pytest.approx(1.0 / 3.0)
        assert p.effective_flops == pytest.approx(layer_cost(conv5).C / p.t_sparse)

    def test_compute_bound_speedup_at_nine_percent(self, conv5, bdw):
        p = project_times(layer_cost(conv5), 0.09, bdw)
        assert p.compute_bound
        assert p.speedup == pytest.approx(3.70, abs=0.01)
        # measured 3.4x on the same layer sits within 25% of the projection
        assert abs(3.4 - p.speedup) / p.speedup < 0.25

    def test_speedup_plateaus_below_crossover(self, conv5, bdw):
        cost = layer_cost(conv5)
        x_star = crossover_density(cost, bdw)
        low = project_times(cost, x_star / 10, bdw)
        assert not low.compute_bound
        assert low.speedup < (cost.C / bdw.F) / (cost.S_A / bdw.B) + 1e-9

    def test_speedup_is_non_increasing_in_density(self, conv5, bdw):
        curve = projection_curve(layer_cost(conv5), bdw, np.geomspace(0.001, 1.0, 60))
        speedups = [p.speedup for p in curve]
        assert all(a >= b - 1e-12 for a, b in zip(speedups, speedups[1:]))

    def test_rejects_bad_inputs(self, bdw):
        with pytest.raises(ModelInputError):
            project_times(LayerCost(1.0, 1.0, 1.0), 0.0, bdw)
        with pytest.raises(ModelInputError):
            project_times(LayerCost(0.0, 1.0, 1.0), 0.5, bdw)

    def test_profile_validation(self):
        with pytest.raises(ValueError):
            PlatformProfile(flops=1e9, bandwidth=1e9, alpha=0.5)
        with pytest.raises(ValueError):
            PlatformProfile(flops=0, bandwidth=1e9)


@pytest.mark.unit
class TestUsefulWindow:
    def test_conv5_bdw(self, conv5, bdw):
        window = useful_sparsity_window(layer_cost(conv5), bdw)
        assert window.has_speedup_potential
        assert 0.01 <= window.x_lower_useful <= 0.04
        assert window.x_lower_useful == pytest.approx(0.0118, rel=0.01)
        assert window.x_upper_useful == pytest.approx(1.0 / 3.0)
        assert abs(window.x_upper_useful - 0.3) < 0.04

    def test_conv5_atom(self, conv5, atom):
        window = useful_sparsity_window(layer_cost(conv5), atom)
        assert 0.005 <= window.x_lower_useful <= 0.02
        assert window.x_lower_useful == pytest.approx(0.0065, rel=0.01)

    def test_fitted_alpha_moves_upper_bound(self, conv5, bdw):
        window = useful_sparsity_window(layer_cost(conv5), bdw.with_alpha(2.5))
        assert window.x_upper_useful == pytest.approx(0.4)

    def test_bandwidth_bound_layer(self, bdw):
        fc6 = LayerSpec.fc(4096, 9216)
        cost = layer_cost(fc6)
        assert math.isinf(crossover_density(cost, bdw))
        window = useful_sparsity_window(cost, bdw)
        assert not window.has_speedup_potential
        assert window.x_lower_useful == 1.0

    def test_matches_grid_search(self):
        """Closed form against a 10^4-point geometric scan over 50 random layer/platform pairs."""
        rng = np.random.default_rng(7)
        grid = np.geomspace(1e-4, 1.0, 10 ** 4)
        ratio = grid[1] / grid[0]
        tol = 1e-9

        def assert_within_one_step(value, hits):
            if not hits.size:
                assert value == pytest.approx(1.0)
                return
            i = hits[0]
            assert value <= grid[i] * (1 + tol)
            if i > 0:
                assert value >= grid[i - 1] * (1 - tol)

        checked = 0
        for _ in range(50):
            cost = LayerCost(
                flops=10 ** rng.uniform(6, 11),
                activation_bytes=10 ** rng.uniform(4, 8),
                weight_bytes=10 ** rng.uniform(3, 8),
            )
            profile = PlatformProfile(
                flops=10 ** rng.uniform(10, 13), bandwidth=10 ** rng.uniform(9, 12),
                alpha=rng.uniform(1.0, 6.0), beta=rng.uniform(1.0, 3.0),
            )
            window = useful_sparsity_window(cost, profile)
            t_compute = profile.alpha * grid * cost.C / profile.F
            t_bw = (cost.S_A + profile.beta * grid * cost.S_W) / profile.B
            t_dense = cost.C / profile.F

            compute_bound = np.nonzero(t_compute >= t_bw)[0]
            slower = np.nonzero(t_compute >= t_dense)[0]
            assert_within_one_step(window.x_lower_useful, compute_bound)
            assert_within_one_step(window.x_upper_useful, slower)

            lower = grid[compute_bound[0]] if compute_bound.size else 1.0
            upper = grid[slower[0]] if slower.size else 1.0
            if max(lower, upper) > min(lower, upper) * ratio ** 2:
                assert window.has_speedup_potential == (lower < upper)
            checked += 1
        assert checked == 50


@pytest.mark.unit
class TestClassification:
    def test_alexnet(self, presets, bdw):
        classes = {layer.name: classify_layer(layer.spec, 1, bdw) for layer in presets.network("AlexNet")}
        for name in ("conv1", "conv2", "conv3", "conv4", "conv5"):
            assert classes[name] is LayerClass.PRUNABLE_FOR_SPEED
        for name in ("fc6", "fc7", "fc8"):
            assert classes[name] is LayerClass.BANDWIDTH_BOUND_ALWAYS

    def test_pointwise_reduce_has_no_benefit(self, presets, bdw):
        layer = presets.layer("googlenet-inception_3a/5x5_reduce")
        x_star = crossover_density(layer_cost(layer.spec), bdw)
        assert x_star == pytest.approx(0.82, abs=0.01)
        assert classify_layer(layer.spec, 1, bdw) is LayerClass.NO_BENEFIT

    def test_toynet_on_atom(self, presets, atom):
        layers = {layer.name: layer.spec for layer in presets.network("ToyNet")}
        assert classify_layer(layers["conv1"], 1, atom) is LayerClass.NO_BENEFIT
        assert classify_layer(layers["conv2"], 1, atom) is LayerClass.PRUNABLE_FOR_SPEED
        assert classify_layer(layers["fc"], 1, atom) is LayerClass.BANDWIDTH_BOUND_ALWAYS
        assert crossover_density(layer_cost(layers["conv2"]), atom) == pytest.approx(0.191, abs=0.002)


@pytest.mark.unit
class TestHelpers:
    def test_network_speedup_is_time_weighted(self):
        assert network_speedup([]) == 1.0
        assert network_speedup([(2.0, 1.0), (1.0, 1.0)]) == pytest.approx(1.5)

    def test_alpha_from_actual_flops(self):
        assert alpha_from_actual_flops(2.15e12, 0.7e12) == pytest.approx(3.07, abs=0.01)
        with pytest.raises(ModelInputError):
            alpha_from_actual_flops(1.0, 0.0)

    def test_structured_break_even(self):
        assert structured_break_even_density(0.1, 3.0) == pytest.approx(0.3)
        assert structured_break_even_density(0.5, 3.0) == 1.0
        assert structured_break_even_density(0.1, 3.0, alpha_group=1.5) == pytest.approx(0.2)
