"""
Layout function over the zero-padded input.
"""
import numpy as np

from sparseconv.errors import GeometryError
from sparseconv.models.layer import LayerSpec


def layout_offset(spec: LayerSpec, c: int, y: int, x: int) -> int:
    """
    Offset of (c, y, x) in the padded C x H_pad x W_pad input.

    Satisfies f(c, y + r, x + s) = f(c, y, x) + f(0, r, s).
    """
    if not (0 <= c < spec.C and 0 <= y < spec.H_pad and 0 <= x < spec.W_pad):
        raise GeometryError(
            f"index ({c}, {y}, {x}) outside padded input {spec.padded_shape}",
            {"c": c, "y": y, "x": x},
        )
    return (c * spec.H_pad + y) * spec.W_pad + x


def layout_offsets(spec: LayerSpec, c, r, s) -> np.ndarray:
    """Vectorised layout_offset over broadcastable index arrays (int64)."""
    c = np.asarray(c, dtype=np.int64)
    r = np.asarray(r, dtype=np.int64)
    s = np.asarray(s, dtype=np.int64)
    if c.size and (c.min() < 0 or c.max() >= spec.C):
        raise GeometryError("channel index out of range")
    if r.size and (r.min() < 0 or r.max() >= spec.H_pad):
        raise GeometryError("row index out of range")
    if s.size and (s.min() < 0 or s.max() >= spec.W_pad):
        raise GeometryError("column index out of range")
    return (c * spec.H_pad + r) * spec.W_pad + s
