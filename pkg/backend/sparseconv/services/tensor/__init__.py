"""
Tensor storage, the layout function and the CSR conversion.
"""
from .codec import (
    decode_kernel,
    decode_tensor,
    encode_kernel,
    encode_tensor,
    load_kernel,
    load_tensor,
    save_kernel,
    save_tensor,
)
from .conversion import densify, densify_matrix, pad_input, sparsify, sparsify_matrix
from .layout import layout_offset, layout_offsets

__all__ = [
    "layout_offset",
    "layout_offsets",
    "sparsify",
    "sparsify_matrix",
    "densify",
    "densify_matrix",
    "pad_input",
    "encode_tensor",
    "decode_tensor",
    "save_tensor",
    "load_tensor",
    "encode_kernel",
    "decode_kernel",
    "save_kernel",
    "load_kernel",
]
