"""
Convolution kernels: dense direct (oracle), direct sparse, lowered and FC SpMDM.
"""
from .dense import conv_dense_direct, conv_dense_direct_batch
from .fc import fc_spmdm
from .lowered import (
    col2im_batch,
    conv_dense_lowered,
    conv_dense_lowered_batch,
    conv_sparse_lowered,
    conv_sparse_lowered_batch,
    im2col,
    im2col_batch,
    lowered_csr,
)
from .sparse_direct import SparseDirectPlan, conv_sparse_direct, conv_sparse_direct_batch
from .threads import thread_count
from .tiling import TilingConfig

__all__ = [
    "conv_dense_direct",
    "conv_dense_direct_batch",
    "conv_sparse_direct",
    "conv_sparse_direct_batch",
    "SparseDirectPlan",
    "conv_sparse_lowered",
    "conv_sparse_lowered_batch",
    "conv_dense_lowered",
    "conv_dense_lowered_batch",
    "im2col",
    "im2col_batch",
    "col2im_batch",
    "lowered_csr",
    "fc_spmdm",
    "thread_count",
    "TilingConfig",
]
