"""
Dense 3-mode and 4-mode float32 tensors.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from sparseconv.errors import GeometryError


def _frozen_float32(data, ndim: int, label: str) -> np.ndarray:
    array = np.ascontiguousarray(data, dtype=np.float32)
    if array.ndim != ndim:
        raise GeometryError(f"{label} expects {ndim} dimensions, got shape {array.shape}")
    if array.size == 0:
        raise GeometryError(f"{label} has an empty dimension: {array.shape}")
    if not np.isfinite(array).all():
        raise GeometryError(f"{label} contains NaN or Inf")
    if array is data:
        array = array.copy()
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Tensor3:
    """C x H x W tensor in CHW order (inputs and conv outputs)."""
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen_float32(self.data, 3, "Tensor3"))

    @classmethod
    def zeros(cls, channels: int, height: int, width: int) -> "Tensor3":
        return cls(np.zeros((channels, height, width), dtype=np.float32))

    @property
    def C(self) -> int:
        return self.data.shape[0]

    @property
    def H(self) -> int:
        return self.data.shape[1]

    @property
    def W(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.data.shape

    def __eq__(self, other) -> bool:
        return isinstance(other, Tensor3) and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Tensor4:
    """N x C x R x S weight tensor in NCRS order."""
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen_float32(self.data, 4, "Tensor4"))

    @classmethod
    def zeros(cls, outputs: int, channels: int, height: int, width: int) -> "Tensor4":
        return cls(np.zeros((outputs, channels, height, width), dtype=np.float32))

    @property
    def N(self) -> int:
        return self.data.shape[0]

    @property
    def C(self) -> int:
        return self.data.shape[1]

    @property
    def R(self) -> int:
        return self.data.shape[2]

    @property
    def S(self) -> int:
        return self.data.shape[3]

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return self.data.shape

    @property
    def density(self) -> float:
        return float(np.count_nonzero(self.data)) / self.data.size

    def __eq__(self, other) -> bool:
        return isinstance(other, Tensor4) and np.array_equal(self.data, other.data)

    __hash__ = None


# Convolution output is an N x H_out x W_out Tensor3
ConvOutput = Tensor3
