"""
Conversion between dense weight tensors and the CSR kernel representation.
"""
from typing import Optional

import numpy as np

from sparseconv.errors import GeometryError
from sparseconv.models.layer import LayerSpec
from sparseconv.models.sparse_kernel import SparseKernelMatrix
from sparseconv.models.tensor import Tensor3, Tensor4
from sparseconv.services.tensor.layout import layout_offsets


def _check_threshold(threshold: float) -> float:
    threshold = float(threshold)
    if not threshold >= 0.0:
        raise GeometryError(f"threshold must be >= 0, got {threshold}")
    return threshold


def sparsify(weights: Tensor4, spec: LayerSpec, threshold: float = 0.0) -> SparseKernelMatrix:
    """
    Keep the entries with ``|w| > threshold`` as a CSR matrix.

    Non-zeros are stored row-major by output channel; within a row they come
    in NCRS flattening order, which is ascending f(c, r, s).
    """
    if weights.shape != spec.weight_shape:
        raise GeometryError(
            f"weights {weights.shape} do not match layer {spec.weight_shape}",
            {"weights": weights.shape, "spec": spec.weight_shape},
        )
    threshold = _check_threshold(threshold)

    data = weights.data
    mask = np.abs(data) > threshold
    n, c, r, s = np.nonzero(mask)
    counts = np.bincount(n, minlength=spec.N)
    rowptr = np.zeros(spec.N + 1, dtype=np.int64)
    np.cumsum(counts, out=rowptr[1:])

    return SparseKernelMatrix(
        rowptr=rowptr,
        colidx=layout_offsets(spec, c, r, s),
        value=data[mask],
        origin=np.stack([c, r, s], axis=1) if n.size else np.zeros((0, 3), dtype=np.int32),
        spec=spec,
    )


def sparsify_matrix(matrix: np.ndarray, threshold: float = 0.0) -> SparseKernelMatrix:
    """CSR form of a dense M x K FC weight matrix (colidx is the column index)."""
    matrix = np.asarray(matrix, dtype=np.float32)
    if matrix.ndim != 2:
        raise GeometryError(f"FC weights must be 2-D, got shape {matrix.shape}")
    rows, cols = matrix.shape
    spec = LayerSpec.fc(outputs=rows, inputs=cols)
    return sparsify(Tensor4(matrix.reshape(rows, cols, 1, 1)), spec, threshold)


def densify(kernel: SparseKernelMatrix) -> Tensor4:
    """Scatter the non-zeros back into an N x C x R x S tensor."""
    dense = np.zeros(kernel.spec.weight_shape, dtype=np.float32)
    if kernel.nnz:
        rows = kernel.row_of_nonzeros()
        origin = kernel.origin
        dense[rows, origin[:, 0], origin[:, 1], origin[:, 2]] = kernel.value
    return Tensor4(dense)


def densify_matrix(kernel: SparseKernelMatrix) -> np.ndarray:
    """Dense M x K matrix of an FC kernel."""
    if not kernel.spec.is_fc:
        raise GeometryError("densify_matrix expects an FC kernel")
    return np.array(densify(kernel).data.reshape(kernel.spec.N, kernel.spec.C))


def pad_array(data: np.ndarray, pad: int) -> np.ndarray:
    """Zero-pad the last two axes of a (..., H, W) array."""
    if pad == 0:
        return np.array(data, dtype=np.float32, copy=True)
    widths = [(0, 0)] * (data.ndim - 2) + [(pad, pad), (pad, pad)]
    return np.pad(np.asarray(data, dtype=np.float32), widths, mode="constant")


def pad_input(tensor: Tensor3, spec: LayerSpec) -> Tensor3:
    if tensor.shape != spec.input_shape:
        raise GeometryError(
            f"input {tensor.shape} does not match layer {spec.input_shape}",
            {"input": tensor.shape, "spec": spec.input_shape},
        )
    return Tensor3(pad_array(tensor.data, spec.pad))


def check_bias(bias: Optional[np.ndarray], outputs: int) -> Optional[np.ndarray]:
    if bias is None:
        return None
    bias = np.ascontiguousarray(bias, dtype=np.float32).reshape(-1)
    if bias.shape != (outputs,):
        raise GeometryError(f"bias must have {outputs} entries, got {bias.shape[0]}")
    return bias
