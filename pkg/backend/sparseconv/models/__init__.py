"""
Data types shared by the services.
"""
from .layer import LayerSpec, NamedLayer
from .profile import LayerCost, PlatformProfile, SparsityWindow
from .sparse_kernel import SparseKernelMatrix
from .tensor import ConvOutput, Tensor3, Tensor4

__all__ = [
    "LayerSpec",
    "NamedLayer",
    "LayerCost",
    "PlatformProfile",
    "SparsityWindow",
    "SparseKernelMatrix",
    "ConvOutput",
    "Tensor3",
    "Tensor4",
]
