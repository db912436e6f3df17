"""
Shape checks shared by the kernels.
"""
import numpy as np

from sparseconv.errors import GeometryError
from sparseconv.models.layer import LayerSpec


def check_batch(images, spec: LayerSpec) -> np.ndarray:
    """Contiguous float32 (B, C, H_in, W_in) batch."""
    images = np.ascontiguousarray(images, dtype=np.float32)
    if images.ndim != 4 or images.shape[1:] != spec.input_shape:
        raise GeometryError(
            f"input batch {images.shape} does not match (B, {spec.C}, {spec.H_in}, {spec.W_in})",
            {"input": images.shape, "spec": spec.input_shape},
        )
    if images.shape[0] == 0:
        raise GeometryError("input batch is empty")
    return images


def check_weights(weights, spec: LayerSpec) -> np.ndarray:
    data = getattr(weights, "data", weights)
    data = np.asarray(data, dtype=np.float32)
    if data.shape != spec.weight_shape:
        raise GeometryError(
            f"weights {data.shape} do not match layer {spec.weight_shape}",
            {"weights": data.shape, "spec": spec.weight_shape},
        )
    return data


def output_buffer(batch: int, spec: LayerSpec, bias) -> np.ndarray:
    """(B, N, H_out*W_out) buffer pre-filled with the bias."""
    out = np.zeros((batch, spec.N, spec.H_out * spec.W_out), dtype=np.float32)
    if bias is not None:
        out += bias[None, :, None]
    return out
