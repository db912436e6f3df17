"""
Dense <-> CSR conversion and the CSR invariants.
"""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparseconv.errors import CsrFormatError, GeometryError
from sparseconv.models.layer import LayerSpec
from sparseconv.models.sparse_kernel import SparseKernelMatrix
from sparseconv.models.tensor import Tensor3, Tensor4
from sparseconv.services.tensor.conversion import (
    densify,
    densify_matrix,
    pad_input,
    sparsify,
    sparsify_matrix,
)
from sparseconv.services.tensor.layout import layout_offsets

from conftest import random_weights

SMALL = LayerSpec(N=4, C=3, R=3, S=3, H_in=6, W_in=6, pad=1)


def check_invariants(kernel: SparseKernelMatrix):
    spec = kernel.spec
    assert kernel.rowptr[0] == 0
    assert np.all(np.diff(kernel.rowptr) >= 0)
    assert kernel.rowptr[-1] == kernel.nnz == kernel.colidx.size
    c, r, s = kernel.origin.T
    assert np.array_equal(kernel.colidx, layout_offsets(spec, c, r, s))
    for n in range(spec.N):
        row = kernel.colidx[kernel.rowptr[n]:kernel.rowptr[n + 1]]
        assert np.all(np.diff(row) > 0)


@pytest.mark.unit
class TestTensors:
    def test_tensors_are_read_only(self):
        t = Tensor3(np.ones((2, 3, 3)))
        with pytest.raises(ValueError):
            t.data[0, 0, 0] = 5.0

    def test_rejects_wrong_rank_and_nan(self):
        with pytest.raises(GeometryError):
            Tensor4(np.ones((2, 3, 3)))
        with pytest.raises(GeometryError):
            Tensor3(np.full((1, 2, 2), np.nan))

    def test_pad_input(self):
        padded = pad_input(Tensor3(np.ones(SMALL.input_shape)), SMALL)
        assert padded.shape == SMALL.padded_shape
        assert padded.data.sum() == 3 * 36
        assert padded.data[:, 0, :].sum() == 0


@pytest.mark.unit
class TestSparsify:
    def test_round_trip_is_exact(self, rng):
        w = random_weights(rng, SMALL.weight_shape, 0.3)
        kernel = sparsify(Tensor4(w), SMALL)
        check_invariants(kernel)
        assert densify(kernel) == Tensor4(w)
        assert kernel.nnz == np.count_nonzero(w)
        assert kernel.density == pytest.approx(np.count_nonzero(w) / w.size)

    def test_threshold_drops_small_magnitudes(self):
        w = np.zeros(SMALL.weight_shape, dtype=np.float32)
        w[0, 0, 0, 0] = 0.5
        w[1, 2, 1, 1] = -0.05
        w[3, 1, 2, 0] = 0.1
        kernel = sparsify(Tensor4(w), SMALL, threshold=0.1)
        assert kernel.nnz == 1
        assert kernel.value.tolist() == [0.5]
        assert kernel.rowptr.tolist() == [0, 1, 1, 1, 1]

    def test_all_zero_kernel(self):
        kernel = sparsify(Tensor4.zeros(*SMALL.weight_shape), SMALL)
        assert kernel.nnz == 0
        assert kernel.rowptr.tolist() == [0] * (SMALL.N + 1)
        assert densify(kernel) == Tensor4.zeros(*SMALL.weight_shape)

    def test_rejects_negative_threshold_and_bad_shape(self, rng):
        w = Tensor4(random_weights(rng, SMALL.weight_shape, 0.5))
        with pytest.raises(GeometryError):
            sparsify(w, SMALL, threshold=-1.0)
        with pytest.raises(GeometryError):
            sparsify(Tensor4(np.ones((4, 3, 1, 1))), SMALL)

    def test_colidx_uses_padded_layout(self):
        w = np.zeros(SMALL.weight_shape, dtype=np.float32)
        w[2, 1, 2, 1] = 1.0
        kernel = sparsify(Tensor4(w), SMALL)
        # H_pad = W_pad = 8
        assert kernel.colidx.tolist() == [(1 * 8 + 2) * 8 + 1]
        assert kernel.origin.tolist() == [[1, 2, 1]]

    def test_fc_matrix_round_trip(self, rng):
        m = random_weights(rng, (7, 11), 0.4)
        kernel = sparsify_matrix(m)
        assert kernel.spec.is_fc
        np.testing.assert_array_equal(densify_matrix(kernel), m)
        # FC colidx is the column index
        rows = kernel.row_of_nonzeros()
        np.testing.assert_array_equal(m[rows, kernel.colidx], kernel.value)

    @given(st.integers(0, 2 ** 31), st.sampled_from([1.0, 0.5, 0.1, 0.01]))
    def test_invariants_hold_for_random_weights(self, seed, density):
        rng = np.random.default_rng(seed)
        w = random_weights(rng, SMALL.weight_shape, density)
        kernel = sparsify(Tensor4(w), SMALL)
        check_invariants(kernel)
        assert densify(kernel) == Tensor4(w)


@pytest.mark.unit
class TestValidate:
    def _parts(self, rng):
        kernel = sparsify(Tensor4(random_weights(rng, SMALL.weight_shape, 0.5)), SMALL)
        return dict(rowptr=kernel.rowptr.copy(), colidx=kernel.colidx.copy(), value=kernel.value.copy(),
                    origin=kernel.origin.copy(), spec=SMALL)

    def test_bad_rowptr_start(self, rng):
        parts = self._parts(rng)
        parts["rowptr"][0] = 1
        with pytest.raises(CsrFormatError):
            SparseKernelMatrix(**parts)

    def test_decreasing_rowptr(self, rng):
        parts = self._parts(rng)
        parts["rowptr"][1], parts["rowptr"][2] = parts["rowptr"][2] + 1, parts["rowptr"][1]
        with pytest.raises(CsrFormatError):
            SparseKernelMatrix(**parts)

    def test_colidx_must_match_origin(self, rng):
        parts = self._parts(rng)
        parts["colidx"][0] += 1
        with pytest.raises(CsrFormatError):
            SparseKernelMatrix(**parts)

    def test_colidx_must_increase_within_row(self, rng):
        parts = self._parts(rng)
        start, end = parts["rowptr"][0], parts["rowptr"][1]
        assert end - start >= 2
        for key in ("colidx", "value", "origin"):
            parts[key][start:end] = parts[key][start:end][::-1].copy()
        with pytest.raises(CsrFormatError):
            SparseKernelMatrix(**parts)

    def test_length_mismatch(self, rng):
        parts = self._parts(rng)
        parts["value"] = parts["value"][:-1]
        with pytest.raises(CsrFormatError):
            SparseKernelMatrix(**parts)
