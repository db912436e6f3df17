"""
Layer geometry
"""
from typing import Literal, Tuple

from pydantic import BaseModel, ConfigDict, NonNegativeInt, PositiveInt, model_validator

from sparseconv.errors import GeometryError

_SPEC_KEYS = {
    "N": "N", "C": "C", "R": "R", "S": "S",
    "H": "H_in", "H_IN": "H_in", "W": "W_in", "W_IN": "W_in",
    "STRIDE": "stride", "PAD": "pad",
}


class LayerSpec(BaseModel):
    """
    Geometry of one convolution (or FC) layer.

    FC layers are the degenerate case R = S = H_in = W_in = 1 with C inputs
    and N outputs.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    N: PositiveInt
    C: PositiveInt
    R: PositiveInt
    S: PositiveInt
    H_in: PositiveInt
    W_in: PositiveInt
    stride: PositiveInt = 1
    pad: NonNegativeInt = 0

    @model_validator(mode="after")
    def _check_output_extent(self) -> "LayerSpec":
        for axis, extent, kernel in (("H", self.H_in, self.R), ("W", self.W_in, self.S)):
            span = extent + 2 * self.pad - kernel
            if span < 0:
                raise GeometryError(f"kernel {axis}={kernel} larger than padded input {extent + 2 * self.pad}")
            if span % self.stride:
                raise GeometryError(
                    f"{axis}_out not integral: ({extent} + 2*{self.pad} - {kernel}) / {self.stride}"
                )
        return self

    @classmethod
    def fc(cls, outputs: int, inputs: int) -> "LayerSpec":
        return cls(N=outputs, C=inputs, R=1, S=1, H_in=1, W_in=1)

    @classmethod
    def parse(cls, text: str) -> "LayerSpec":
        """Parse ``"N=256,C=384,R=3,S=3,H=13,W=13,stride=1,pad=1"``."""
        fields = {}
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            key, sep, value = item.partition("=")
            name = _SPEC_KEYS.get(key.strip().upper())
            if not sep or name is None:
                raise GeometryError(f"cannot parse layer field '{item}'")
            try:
                fields[name] = int(value)
            except ValueError:
                raise GeometryError(f"layer field '{key}' is not an integer: '{value}'") from None
        return cls(**fields)

    @property
    def H_out(self) -> int:
        return (self.H_in + 2 * self.pad - self.R) // self.stride + 1

    @property
    def W_out(self) -> int:
        return (self.W_in + 2 * self.pad - self.S) // self.stride + 1

    @property
    def H_pad(self) -> int:
        return self.H_in + 2 * self.pad

    @property
    def W_pad(self) -> int:
        return self.W_in + 2 * self.pad

    @property
    def is_fc(self) -> bool:
        return self.R == self.S == self.H_in == self.W_in == 1

    @property
    def is_pointwise(self) -> bool:
        return self.R == 1 and self.S == 1

    @property
    def weight_shape(self) -> Tuple[int, int, int, int]:
        return (self.N, self.C, self.R, self.S)

    @property
    def input_shape(self) -> Tuple[int, int, int]:
        return (self.C, self.H_in, self.W_in)

    @property
    def padded_shape(self) -> Tuple[int, int, int]:
        return (self.C, self.H_pad, self.W_pad)

    @property
    def output_shape(self) -> Tuple[int, int, int]:
        return (self.N, self.H_out, self.W_out)

    def describe(self) -> str:
        return (
            f"N={self.N},C={self.C},R={self.R},S={self.S},"
            f"H={self.H_in},W={self.W_in},stride={self.stride},pad={self.pad}"
        )


class NamedLayer(BaseModel):
    """A layer of a network preset or of the toy net."""
    model_config = ConfigDict(frozen=True)

    name: str
    spec: LayerSpec
    kind: Literal["conv", "fc"] = "conv"
