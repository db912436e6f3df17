"""
Lowering (im2col) and the convolutions built on it.
"""
from typing import Optional

import numpy as np
import scipy.sparse as sp
from numpy.lib.stride_tricks import sliding_window_view

from sparseconv.errors import GeometryError
from sparseconv.models.layer import LayerSpec
from sparseconv.models.sparse_kernel import SparseKernelMatrix
from sparseconv.models.tensor import ConvOutput, Tensor3
from sparseconv.services.conv._checks import check_batch, check_weights
from sparseconv.services.tensor.conversion import check_bias


def lowering_rows(spec: LayerSpec, origin: np.ndarray) -> np.ndarray:
    """Row of the lowered matrix for each (c, r, s): (c*R + r)*S + s."""
    origin = origin.astype(np.int64)
    return (origin[:, 0] * spec.R + origin[:, 1]) * spec.S + origin[:, 2]


def im2col_batch(images: np.ndarray, spec: LayerSpec) -> np.ndarray:
    """(B, C*R*S, H_out*W_out); column y*W_out + x is the receptive field of (y, x)."""
    images = np.asarray(images)
    if images.ndim != 4 or images.shape[1:] != spec.input_shape:
        raise GeometryError(f"input batch {images.shape} does not match {spec.input_shape}")
    p = spec.pad
    padded = np.pad(images, [(0, 0), (0, 0), (p, p), (p, p)]) if p else images
    st = spec.stride
    windows = sliding_window_view(padded, (spec.R, spec.S), axis=(2, 3))[:, :, ::st, ::st]
    # (B, C, H_out, W_out, R, S) -> (B, C, R, S, H_out, W_out)
    cols = windows.transpose(0, 1, 4, 5, 2, 3)
    return np.ascontiguousarray(cols).reshape(
        images.shape[0], spec.C * spec.R * spec.S, spec.H_out * spec.W_out
    )


def im2col(tensor: Tensor3, spec: LayerSpec) -> np.ndarray:
    if tensor.shape != spec.input_shape:
        raise GeometryError(f"input {tensor.shape} does not match {spec.input_shape}")
    return im2col_batch(tensor.data[None], spec)[0]


def col2im_batch(cols: np.ndarray, spec: LayerSpec) -> np.ndarray:
    """Adjoint of im2col_batch: scatter-add columns back to (B, C, H_in, W_in)."""
    batch = cols.shape[0]
    st = spec.stride
    blocks = cols.reshape(batch, spec.C, spec.R, spec.S, spec.H_out, spec.W_out)
    padded = np.zeros((batch, spec.C, spec.H_pad, spec.W_pad), dtype=cols.dtype)
    for r in range(spec.R):
        for s in range(spec.S):
            padded[:, :, r:r + st * spec.H_out:st, s:s + st * spec.W_out:st] += blocks[:, :, r, s]
    if spec.pad:
        return padded[:, :, spec.pad:-spec.pad, spec.pad:-spec.pad]
    return padded


def lowered_csr(kernel: SparseKernelMatrix) -> sp.csr_matrix:
    """The kernel as an N x (C*R*S) scipy CSR matrix in lowering order."""
    spec = kernel.spec
    return sp.csr_matrix(
        (kernel.value, lowering_rows(spec, kernel.origin), kernel.rowptr),
        shape=(spec.N, spec.C * spec.R * spec.S),
    )


def _finish(out: np.ndarray, spec: LayerSpec, bias: Optional[np.ndarray]) -> np.ndarray:
    out = out.reshape(out.shape[0], *spec.output_shape).astype(np.float32, copy=False)
    if bias is not None:
        out += bias[None, :, None, None]
    return out


def conv_sparse_lowered_batch(images: np.ndarray, kernel: SparseKernelMatrix, spec: LayerSpec,
                              bias: Optional[np.ndarray] = None,
                              matrix: Optional[sp.csr_matrix] = None) -> np.ndarray:
    """CSR x im2col per image. ``matrix`` reuses a prepared lowered_csr."""
    if kernel.spec != spec:
        raise GeometryError("kernel was built against a different layer")
    images = check_batch(images, spec)
    bias = check_bias(bias, spec.N)
    csr = matrix if matrix is not None else lowered_csr(kernel)
    cols = im2col_batch(images, spec)
    out = np.stack([np.asarray(csr @ cols[b], dtype=np.float32) for b in range(cols.shape[0])])
    return _finish(out, spec, bias)


def conv_sparse_lowered(tensor: Tensor3, kernel: SparseKernelMatrix, spec: LayerSpec,
                        bias: Optional[np.ndarray] = None) -> ConvOutput:
    return ConvOutput(conv_sparse_lowered_batch(tensor.data[None], kernel, spec, bias)[0])


def conv_dense_lowered_batch(images: np.ndarray, weights, spec: LayerSpec,
                             bias: Optional[np.ndarray] = None) -> np.ndarray:
    """im2col followed by a dense GEMM (the SGEMM proxy baseline)."""
    images = check_batch(images, spec)
    w = check_weights(weights, spec).reshape(spec.N, -1)
    bias = check_bias(bias, spec.N)
    out = np.matmul(w, im2col_batch(images, spec))
    return _finish(out, spec, bias)


def conv_dense_lowered(tensor: Tensor3, weights, spec: LayerSpec,
                       bias: Optional[np.ndarray] = None) -> ConvOutput:
    return ConvOutput(conv_dense_lowered_batch(tensor.data[None], weights, spec, bias)[0])
