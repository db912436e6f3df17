"""
Dense direct convolution, the reference every other kernel is checked against.
"""
from typing import Optional

import numpy as np

from sparseconv.models.layer import LayerSpec
from sparseconv.models.tensor import ConvOutput, Tensor3, Tensor4
from sparseconv.services.conv._checks import check_batch, check_weights
from sparseconv.services.tensor.conversion import check_bias, pad_array


def conv_dense_direct_batch(images: np.ndarray, weights, spec: LayerSpec,
                            bias: Optional[np.ndarray] = None) -> np.ndarray:
    """
    O(b,n,y,x) = sum_c,r,s W(n,c,r,s) * I_pad(b, c, y*stride + r, x*stride + s) + bias[n]

    One (r, s) tap at a time over strided windows of the padded input;
    accumulation stays in float32.
    """
    images = check_batch(images, spec)
    w = check_weights(weights, spec)
    bias = check_bias(bias, spec.N)
    padded = pad_array(images, spec.pad)

    st = spec.stride
    y_span = st * (spec.H_out - 1) + 1
    x_span = st * (spec.W_out - 1) + 1
    out = np.zeros((images.shape[0], spec.N, spec.H_out, spec.W_out), dtype=np.float32)
    for r in range(spec.R):
        for s in range(spec.S):
            window = padded[:, :, r:r + y_span:st, s:s + x_span:st]
            out += np.einsum("nc,bchw->bnhw", w[:, :, r, s], window, dtype=np.float32)
    if bias is not None:
        out += bias[None, :, None, None]
    return out


def conv_dense_direct(tensor: Tensor3, weights: Tensor4, spec: LayerSpec,
                      bias: Optional[np.ndarray] = None) -> ConvOutput:
    out = conv_dense_direct_batch(tensor.data[None], weights, spec, bias)
    return ConvOutput(out[0])
