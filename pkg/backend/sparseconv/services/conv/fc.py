"""
Sparse FC layer as SpMDM: CSR weights (M x K) times dense activations (K x B).
"""
from typing import Optional

import numpy as np

from sparseconv.config import Config
from sparseconv.errors import GeometryError
from sparseconv.models.sparse_kernel import SparseKernelMatrix
from sparseconv.services.conv._kernels import spmdm_kernel
from sparseconv.services.tensor.conversion import check_bias


def fc_spmdm(weights: SparseKernelMatrix, activations: np.ndarray,
             bias: Optional[np.ndarray] = None,
             tile_rows: int = Config.TILE_FC_ROWS,
             block_cols: int = Config.TILE_FC_COLUMNS) -> np.ndarray:
    """Return the dense M x B product plus bias (broadcast over columns)."""
    if not weights.spec.is_fc:
        raise GeometryError("fc_spmdm expects a kernel built with LayerSpec.fc", {"spec": weights.spec.describe()})
    if tile_rows < 1 or block_cols < 1:
        raise GeometryError(f"tile sizes must be >= 1, got {tile_rows} x {block_cols}")
    act = np.ascontiguousarray(activations, dtype=np.float32)
    M, K = weights.spec.N, weights.spec.C
    if act.ndim != 2 or act.shape[0] != K:
        raise GeometryError(
            f"activations {act.shape} do not match weights {M} x {K}",
            {"activations": act.shape, "weights": (M, K)},
        )
    bias = check_bias(bias, M)
    out = np.zeros((M, act.shape[1]), dtype=np.float32)
    if bias is not None:
        out += bias[:, None]
    if act.shape[1] == 0:
        return out
    spmdm_kernel(weights.rowptr, weights.colidx, weights.value, act, out,
                 min(tile_rows, M), block_cols)
    return out
