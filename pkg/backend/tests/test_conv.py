"""
Convolution kernels against the dense direct oracle.
"""
import numpy as np
import pytest
from hypothesis import given, strategies as st
from threadpoolctl import threadpool_info

from sparseconv.errors import GeometryError
from sparseconv.models.layer import LayerSpec
from sparseconv.models.tensor import Tensor3, Tensor4
from sparseconv.services.conv import (
    SparseDirectPlan,
    TilingConfig,
    col2im_batch,
    conv_dense_direct,
    conv_dense_direct_batch,
    conv_dense_lowered_batch,
    conv_sparse_direct,
    conv_sparse_direct_batch,
    conv_sparse_lowered_batch,
    fc_spmdm,
    im2col,
    im2col_batch,
    lowered_csr,
    thread_count,
)
from sparseconv.services.conv.sparse_direct import column_bands
from sparseconv.services.conv.threads import max_threads
from sparseconv.services.tensor.conversion import sparsify, sparsify_matrix

from conftest import random_weights


def assert_matches(got, want, rtol=1e-5):
    """Elementwise rtol, with an absolute floor scaled to the output magnitude."""
    scale = max(1.0, float(np.max(np.abs(want)))) if want.size else 1.0
    np.testing.assert_allclose(got, want, rtol=rtol, atol=rtol * scale)


@st.composite
def conv_cases(draw, max_channels=32, max_extent=16):
    R = draw(st.sampled_from([1, 3, 5]))
    S = draw(st.sampled_from([1, 3, 5]))
    stride = draw(st.sampled_from([1, 2]))
    pad = draw(st.sampled_from([0, 1, 2]))

    def extent(k):
        valid = [h for h in range(1, max_extent + 1) if h + 2 * pad >= k and (h + 2 * pad - k) % stride == 0]
        return draw(st.sampled_from(valid))

    spec = LayerSpec(
        N=draw(st.integers(1, max_channels)), C=draw(st.integers(1, max_channels)),
        R=R, S=S, H_in=extent(R), W_in=extent(S), stride=stride, pad=pad,
    )
    density = draw(st.sampled_from([1.0, 0.5, 0.1, 0.01]))
    batch = draw(st.integers(1, 2))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    with_bias = draw(st.booleans())
    return spec, density, batch, seed, with_bias


@st.composite
def tilings(draw):
    return TilingConfig(
        output_channel_tile=draw(st.integers(1, 8)),
        register_block_h=draw(st.integers(1, 3)),
        register_block_w=draw(st.one_of(st.none(), st.integers(1, 5))),
        column_block=draw(st.integers(1, 8)),
    )


def make_operands(spec, density, batch, seed, with_bias):
    rng = np.random.default_rng(seed)
    w = random_weights(rng, spec.weight_shape, density)
    x = rng.standard_normal((batch, *spec.input_shape)).astype(np.float32)
    bias = rng.standard_normal(spec.N).astype(np.float32) if with_bias else None
    return w, x, bias


@pytest.mark.unit
@given(conv_cases(), tilings())
def test_sparse_kernels_match_dense_oracle(case, tiling):
    spec, density, batch, seed, with_bias = case
    w, x, bias = make_operands(spec, density, batch, seed, with_bias)
    kernel = sparsify(Tensor4(w), spec)

    want = conv_dense_direct_batch(x, w, spec, bias)
    assert want.shape == (batch, *spec.output_shape)
    assert_matches(conv_sparse_direct_batch(x, kernel, spec, bias, tiling), want)
    assert_matches(conv_sparse_lowered_batch(x, kernel, spec, bias), want)
    assert_matches(conv_dense_lowered_batch(x, w, spec, bias), want)


@pytest.mark.unit
@given(conv_cases(max_channels=8, max_extent=9), st.floats(0.05, 1.0))
def test_pruning_equals_zeroing_dense_weights(case, threshold):
    spec, _, batch, seed, _ = case
    w, x, _ = make_operands(spec, 1.0, batch, seed, False)
    zeroed = np.where(np.abs(w) > threshold, w, 0).astype(np.float32)
    got = conv_sparse_direct_batch(x, sparsify(Tensor4(w), spec, threshold), spec)
    assert_matches(got, conv_dense_direct_batch(x, zeroed, spec))


@pytest.mark.unit
@given(conv_cases(max_channels=8, max_extent=9), st.sampled_from([-2.0, 0.5, 3.0]))
def test_linearity(case, a):
    spec, density, batch, seed, _ = case
    w, x, _ = make_operands(spec, density, batch, seed, False)
    kernel = sparsify(Tensor4(w), spec)
    base = conv_sparse_direct_batch(x, kernel, spec)
    assert_matches(conv_sparse_direct_batch(a * x, kernel, spec), a * base)


@pytest.mark.unit
class TestSparseDirect:
    def test_alexnet_conv5_at_nine_percent(self, conv5, rng):
        w = random_weights(rng, conv5.weight_shape, 0.09)
        x = Tensor3(rng.standard_normal(conv5.input_shape))
        kernel = sparsify(Tensor4(w), conv5)
        assert kernel.density == pytest.approx(0.09, abs=0.005)
        got = conv_sparse_direct(x, kernel, conv5)
        want = conv_dense_direct(x, Tensor4(w), conv5)
        assert isinstance(got, Tensor3)
        assert_matches(got.data, want.data)

    def test_result_is_independent_of_thread_count(self, rng):
        spec = LayerSpec(N=24, C=20, R=3, S=3, H_in=15, W_in=15, pad=1)
        kernel = sparsify(Tensor4(random_weights(rng, spec.weight_shape, 0.2)), spec)
        x = rng.standard_normal((3, *spec.input_shape)).astype(np.float32)
        plan = SparseDirectPlan(kernel, TilingConfig(output_channel_tile=4, column_block=8))
        with thread_count(1):
            single = plan.run(x)
        with thread_count(max_threads()):
            multi = plan.run(x)
        np.testing.assert_array_equal(single, multi)
        np.testing.assert_array_equal(plan.run(x), single)

    def test_thread_count_also_caps_blas(self):
        np.ones((64, 64)) @ np.ones((64, 64))
        with thread_count(1):
            blas = [pool for pool in threadpool_info() if pool["user_api"] == "blas"]
            assert all(pool["num_threads"] == 1 for pool in blas)

    def test_empty_kernel_gives_bias(self, rng):
        spec = LayerSpec(N=3, C=2, R=3, S=3, H_in=5, W_in=5)
        kernel = sparsify(Tensor4.zeros(*spec.weight_shape), spec)
        bias = np.array([1.0, -2.0, 0.5], dtype=np.float32)
        out = conv_sparse_direct_batch(rng.standard_normal((1, 2, 5, 5)), kernel, spec, bias)
        np.testing.assert_array_equal(out[0, :, 1, 1], bias)

    def test_kernel_from_another_layer_rejected(self, rng):
        spec = LayerSpec(N=3, C=2, R=3, S=3, H_in=5, W_in=5)
        other = LayerSpec(N=3, C=2, R=3, S=3, H_in=7, W_in=7)
        kernel = sparsify(Tensor4(random_weights(rng, spec.weight_shape, 0.5)), spec)
        with pytest.raises(GeometryError):
            conv_sparse_direct_batch(rng.standard_normal((1, 2, 7, 7)), kernel, other)

    def test_input_shape_checked(self, rng):
        spec = LayerSpec(N=3, C=2, R=3, S=3, H_in=5, W_in=5)
        kernel = sparsify(Tensor4(random_weights(rng, spec.weight_shape, 0.5)), spec)
        with pytest.raises(GeometryError):
            conv_sparse_direct_batch(rng.standard_normal((1, 3, 5, 5)), kernel, spec)

    def test_column_bands_partition_rows(self, rng):
        spec = LayerSpec(N=6, C=10, R=3, S=3, H_in=5, W_in=5, pad=1)
        kernel = sparsify(Tensor4(random_weights(rng, spec.weight_shape, 0.4)), spec)
        bands = column_bands(kernel, column_block=4)
        assert bands.shape == (6, 4)
        np.testing.assert_array_equal(bands[:, 0], kernel.rowptr[:-1])
        np.testing.assert_array_equal(bands[:, -1], kernel.rowptr[1:])
        for n in range(spec.N):
            for b in range(3):
                channels = kernel.origin[bands[n, b]:bands[n, b + 1], 0]
                assert np.all((channels >= 4 * b) & (channels < 4 * (b + 1)))

    def test_register_block_defaults(self, conv5):
        wide = LayerSpec(N=4, C=4, R=3, S=3, H_in=27, W_in=27, pad=1)
        assert TilingConfig().resolve(conv5).block_w == 13
        assert TilingConfig().resolve(wide).block_w == 8
        assert TilingConfig(output_channel_tile=1000).resolve(conv5).output_channel_tile == 256


@pytest.mark.unit
class TestLowering:
    def test_im2col_columns_are_receptive_fields(self):
        spec = LayerSpec(N=1, C=1, R=2, S=2, H_in=3, W_in=3)
        x = Tensor3(np.arange(9, dtype=np.float32).reshape(1, 3, 3))
        cols = im2col(x, spec)
        assert cols.shape == (4, 4)
        # column of output (0, 1) is the window [[1, 2], [4, 5]]
        assert cols[:, 1].tolist() == [1, 2, 4, 5]

    def test_col2im_is_the_adjoint(self, rng):
        spec = LayerSpec(N=2, C=3, R=3, S=3, H_in=7, W_in=7, stride=2, pad=1)
        x = rng.standard_normal((2, *spec.input_shape))
        y = rng.standard_normal((2, spec.C * 9, spec.H_out * spec.W_out))
        lhs = np.sum(im2col_batch(x, spec) * y)
        rhs = np.sum(x * col2im_batch(y, spec))
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_im2col_keeps_dtype(self, rng):
        spec = LayerSpec(N=1, C=1, R=3, S=3, H_in=4, W_in=4, pad=1)
        assert im2col_batch(rng.standard_normal((1, 1, 4, 4)), spec).dtype == np.float64

    def test_lowered_csr_is_the_flattened_weights(self, rng):
        spec = LayerSpec(N=5, C=3, R=3, S=2, H_in=6, W_in=6)
        w = random_weights(rng, spec.weight_shape, 0.4)
        np.testing.assert_array_equal(lowered_csr(sparsify(Tensor4(w), spec)).toarray(), w.reshape(5, -1))


@pytest.mark.unit
class TestFcSpmdm:
    @pytest.mark.parametrize("tile_rows,block_cols", [(1, 1), (4, 3), (32, 16), (100, 100)])
    def test_matches_dense_product(self, rng, tile_rows, block_cols):
        w = random_weights(rng, (37, 53), 0.2)
        act = rng.standard_normal((53, 9)).astype(np.float32)
        bias = rng.standard_normal(37).astype(np.float32)
        got = fc_spmdm(sparsify_matrix(w), act, bias, tile_rows, block_cols)
        assert_matches(got, w @ act + bias[:, None])

    def test_zero_columns(self, rng):
        w = random_weights(rng, (4, 6), 0.5)
        out = fc_spmdm(sparsify_matrix(w), np.zeros((6, 0), dtype=np.float32))
        assert out.shape == (4, 0)

    def test_rejects_conv_kernel_and_bad_shapes(self, rng):
        spec = LayerSpec(N=2, C=2, R=3, S=3, H_in=4, W_in=4)
        with pytest.raises(GeometryError):
            fc_spmdm(sparsify(Tensor4(random_weights(rng, spec.weight_shape, 0.5)), spec), np.ones((18, 2)))
        with pytest.raises(GeometryError):
            fc_spmdm(sparsify_matrix(np.ones((3, 4))), np.ones((5, 2)))
        with pytest.raises(GeometryError):
            fc_spmdm(sparsify_matrix(np.ones((3, 4))), np.ones((4, 2)), tile_rows=0)
