"""
Direct sparse convolution: CSR non-zeros streamed against offset-shifted
views of the padded input, without materializing the lowered matrix.
"""
from typing import Optional

import numpy as np

from sparseconv.errors import GeometryError
from sparseconv.models.layer import LayerSpec
from sparseconv.models.sparse_kernel import SparseKernelMatrix
from sparseconv.models.tensor import ConvOutput, Tensor3
from sparseconv.services.conv._checks import check_batch, output_buffer
from sparseconv.services.conv._kernels import sparse_direct_kernel
from sparseconv.services.conv.tiling import ResolvedTiling, TilingConfig
from sparseconv.services.tensor.conversion import check_bias, pad_array


def column_bands(kernel: SparseKernelMatrix, column_block: int) -> np.ndarray:
    """
    band_ptr of shape (N, n_bands + 1): row n's non-zeros with input channel
    in [b*column_block, (b+1)*column_block) are band_ptr[n, b]:band_ptr[n, b+1].
    """
    spec = kernel.spec
    n_bands = (spec.C + column_block - 1) // column_block
    keys = kernel.row_of_nonzeros() * n_bands + kernel.origin[:, 0].astype(np.int64) // column_block
    targets = np.arange(spec.N, dtype=np.int64)[:, None] * n_bands + np.arange(n_bands + 1)[None, :]
    return np.searchsorted(keys, targets, side="left").astype(np.int64)


class SparseDirectPlan:
    """
    Precomputed launch state for one kernel and tiling.

    Building the plan sorts the non-zeros into column bands once; ``run``
    then only pads the input and calls the compiled loop.
    """

    def __init__(self, kernel: SparseKernelMatrix, tiling: Optional[TilingConfig] = None):
        self.kernel = kernel
        self.spec = kernel.spec
        self.tiling: ResolvedTiling = (tiling or TilingConfig()).resolve(self.spec)
        self.band_ptr = column_bands(kernel, self.tiling.column_block)
        self._colidx = np.ascontiguousarray(kernel.colidx)
        self._value = np.ascontiguousarray(kernel.value)

    def run_padded(self, padded: np.ndarray, bias: Optional[np.ndarray] = None) -> np.ndarray:
        """Convolve an already padded (B, C, H_pad, W_pad) batch."""
        spec, t = self.spec, self.tiling
        if padded.ndim != 4 or padded.shape[1:] != spec.padded_shape:
            raise GeometryError(f"padded batch {padded.shape} does not match {spec.padded_shape}")
        flat = np.ascontiguousarray(padded, dtype=np.float32).reshape(padded.shape[0], -1)
        out = output_buffer(padded.shape[0], spec, check_bias(bias, spec.N))
        sparse_direct_kernel(
            flat, out, self._colidx, self._value, self.band_ptr,
            spec.H_out, spec.W_out, spec.W_pad, spec.stride,
            t.output_channel_tile, t.block_h, t.block_w,
        )
        return out.reshape(padded.shape[0], *spec.output_shape)

    def run(self, images: np.ndarray, bias: Optional[np.ndarray] = None) -> np.ndarray:
        images = check_batch(images, self.spec)
        return self.run_padded(pad_array(images, self.spec.pad), bias)


def _plan_for(kernel: SparseKernelMatrix, spec: LayerSpec, tiling: Optional[TilingConfig]) -> SparseDirectPlan:
    if kernel.spec != spec:
        raise GeometryError(
            "kernel was built against a different layer",
            {"kernel": kernel.spec.describe(), "spec": spec.describe()},
        )
    return SparseDirectPlan(kernel, tiling)


def conv_sparse_direct_batch(images: np.ndarray, kernel: SparseKernelMatrix, spec: LayerSpec,
                             bias: Optional[np.ndarray] = None,
                             tiling: Optional[TilingConfig] = None) -> np.ndarray:
    return _plan_for(kernel, spec, tiling).run(images, bias)


def conv_sparse_direct(tensor: Tensor3, kernel: SparseKernelMatrix, spec: LayerSpec,
                       bias: Optional[np.ndarray] = None,
                       tiling: Optional[TilingConfig] = None) -> ConvOutput:
    out = conv_sparse_direct_batch(tensor.data[None], kernel, spec, bias, tiling)
    return ConvOutput(out[0])
