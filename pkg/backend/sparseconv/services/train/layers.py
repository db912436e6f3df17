"""
Forward and backward passes of the toy net's layers (im2col based).

Dtype follows the inputs, so float64 works for gradient checks.
"""
from typing import Tuple

import numpy as np

from sparseconv.models.layer import LayerSpec
from sparseconv.services.conv.lowered import col2im_batch, im2col_batch


def conv_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, spec: LayerSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Returns (B, N, H_out, W_out) and the im2col matrix for the backward pass."""
    cols = im2col_batch(x, spec)
    out = np.matmul(w.reshape(spec.N, -1), cols) + b[None, :, None]
    return out.reshape(x.shape[0], *spec.output_shape), cols


def conv_backward(dout: np.ndarray, cols: np.ndarray, w: np.ndarray,
                  spec: LayerSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients w.r.t. input, weights and bias."""
    batch = dout.shape[0]
    d2 = dout.reshape(batch, spec.N, -1)
    dw = np.einsum("bnp,bkp->nk", d2, cols).reshape(w.shape)
    db = d2.sum(axis=(0, 2))
    dcols = np.matmul(w.reshape(spec.N, -1).T, d2)
    return col2im_batch(dcols, spec), dw, db


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(dout: np.ndarray, pre: np.ndarray) -> np.ndarray:
    return dout * (pre > 0)


def fc_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    return x @ w.T + b


def fc_backward(dout: np.ndarray, x: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return dout @ w, dout.T @ x, dout.sum(axis=0)


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean loss over the batch and its gradient w.r.t. the logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    batch = logits.shape[0]
    loss = -float(log_probs[np.arange(batch), labels].mean())
    grad = np.exp(log_probs)
    grad[np.arange(batch), labels] -= 1
    return loss, grad / batch
