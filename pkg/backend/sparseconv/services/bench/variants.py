"""
Kernel variants the harness can time. Each prepares its operands once so
``run`` covers only the kernel.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Type

import numpy as np

from sparseconv.models.layer import NamedLayer
from sparseconv.models.tensor import Tensor4
from sparseconv.services.conv.dense import conv_dense_direct_batch
from sparseconv.services.conv.fc import fc_spmdm
from sparseconv.services.conv.lowered import conv_dense_lowered_batch, conv_sparse_lowered_batch, lowered_csr
from sparseconv.services.conv.sparse_direct import SparseDirectPlan
from sparseconv.services.conv.tiling import TilingConfig
from sparseconv.services.tensor.conversion import pad_array, sparsify, sparsify_matrix


@dataclass
class Workload:
    """
    One layer's operands. Conv: ``inputs`` is (B, C, H_in, W_in) and
    ``weights`` N x C x R x S. FC: ``inputs`` is K x B and ``weights`` M x K.
    """
    layer: NamedLayer
    weights: np.ndarray
    inputs: np.ndarray
    density: float

    @property
    def spec(self):
        return self.layer.spec

    @property
    def batch(self) -> int:
        return self.inputs.shape[1] if self.layer.kind == "fc" else self.inputs.shape[0]


class KernelVariant(ABC):
    """Base class of a timed kernel."""
    name: str = ""
    kind: str = "conv"
    is_sparse: bool = False

    def __init__(self):
        self.description = self.get_description()
        self.workload: Optional[Workload] = None

    @abstractmethod
    def get_description(self) -> str:
        pass

    @abstractmethod
    def prepare(self, workload: Workload) -> None:
        """Build whatever the kernel needs outside the timed region."""
        pass

    @abstractmethod
    def run(self) -> np.ndarray:
        """Execute once; conv variants return (B, N, H_out, W_out), FC ones M x B."""
        pass

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "kind": self.kind, "description": self.description}


class DenseDirectVariant(KernelVariant):
    name = "dense_direct"

    def get_description(self) -> str:
        return "Dense direct convolution over strided windows (correctness oracle)"

    def prepare(self, workload: Workload) -> None:
        self.workload = workload

    def run(self) -> np.ndarray:
        w = self.workload
        return conv_dense_direct_batch(w.inputs, w.weights, w.spec)


class DenseLoweredVariant(KernelVariant):
    name = "dense_lowered"

    def get_description(self) -> str:
        return "im2col followed by dense GEMM"

    def prepare(self, workload: Workload) -> None:
        self.workload = workload

    def run(self) -> np.ndarray:
        w = self.workload
        return conv_dense_lowered_batch(w.inputs, w.weights, w.spec)


class SparseDirectVariant(KernelVariant):
    name = "sparse_direct"
    is_sparse = True

    def __init__(self, tiling: Optional[TilingConfig] = None):
        self.tiling = tiling
        super().__init__()

    def get_description(self) -> str:
        return "Direct sparse convolution streaming CSR non-zeros over the padded input"

    def prepare(self, workload: Workload) -> None:
        self.workload = workload
        self.plan = SparseDirectPlan(sparsify(Tensor4(workload.weights), workload.spec), self.tiling)
        self.padded = pad_array(workload.inputs, workload.spec.pad)

    def run(self) -> np.ndarray:
        return self.plan.run_padded(self.padded)


class SparseLoweredVariant(KernelVariant):
    name = "sparse_lowered"
    is_sparse = True

    def get_description(self) -> str:
        return "CSR times the im2col matrix"

    def prepare(self, workload: Workload) -> None:
        self.workload = workload
        self.kernel = sparsify(Tensor4(workload.weights), workload.spec)
        self.matrix = lowered_csr(self.kernel)

    def run(self) -> np.ndarray:
        w = self.workload
        return conv_sparse_lowered_batch(w.inputs, self.kernel, w.spec, matrix=self.matrix)


class FcDenseVariant(KernelVariant):
    name = "fc_dense"
    kind = "fc"

    def get_description(self) -> str:
        return "Dense FC layer as GEMM (correctness oracle)"

    def prepare(self, workload: Workload) -> None:
        self.workload = workload

    def run(self) -> np.ndarray:
        return self.workload.weights @ self.workload.inputs


class FcSpmdmVariant(KernelVariant):
    name = "fc_spmdm"
    kind = "fc"
    is_sparse = True

    def get_description(self) -> str:
        return "Sparse FC layer as CSR x dense SpMDM"

    def prepare(self, workload: Workload) -> None:
        self.workload = workload
        self.kernel = sparsify_matrix(workload.weights)

    def run(self) -> np.ndarray:
        return fc_spmdm(self.kernel, self.workload.inputs)


VARIANTS: Dict[str, Type[KernelVariant]] = {
    cls.name: cls
    for cls in (DenseDirectVariant, DenseLoweredVariant, SparseDirectVariant,
                SparseLoweredVariant, FcDenseVariant, FcSpmdmVariant)
}

# reference variant per layer kind: oracle for the correctness gate and speedup baseline
BASELINE = {"conv": DenseDirectVariant.name, "fc": FcDenseVariant.name}


def variants_for(kind: str, names: Optional[List[str]] = None) -> List[KernelVariant]:
    """Instances of the requested variants (default: all) that apply to ``kind``."""
    selected = names or list(VARIANTS)
    unknown = [name for name in selected if name not in VARIANTS]
    if unknown:
        raise KeyError(f"unknown kernel variants {unknown}, available: {sorted(VARIANTS)}")
    return [VARIANTS[name]() for name in selected if VARIANTS[name].kind == kind]
