"""
Desk-scale CNN: a chain of 3x3 conv + ReLU layers and one FC classifier.
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from sparseconv.errors import GeometryError
from sparseconv.models.layer import LayerSpec, NamedLayer
from sparseconv.models.tensor import Tensor4
from sparseconv.services.conv.fc import fc_spmdm
from sparseconv.services.conv.sparse_direct import conv_sparse_direct_batch
from sparseconv.services.gsl.state import LayerStatus
from sparseconv.services.tensor.conversion import sparsify, sparsify_matrix
from sparseconv.services.train.layers import (
    conv_backward,
    conv_forward,
    fc_backward,
    fc_forward,
    relu,
    relu_backward,
    softmax_cross_entropy,
)

MAX_PARAMETERS = 1_000_000
FC_INIT_STD = 0.01


def toynet_layers(classes: int = 4, input_size: int = 12,
                  channels: Sequence[int] = (8, 16)) -> List[NamedLayer]:
    """conv1 keeps the spatial size (pad 1), later convs shrink it by 2."""
    layers = []
    c_in, size = 1, input_size
    for i, c_out in enumerate(channels):
        spec = LayerSpec(N=c_out, C=c_in, R=3, S=3, H_in=size, W_in=size, pad=1 if i == 0 else 0)
        layers.append(NamedLayer(name=f"conv{i + 1}", spec=spec))
        c_in, size = c_out, spec.H_out
    layers.append(NamedLayer(name="fc", spec=LayerSpec.fc(classes, c_in * size * size), kind="fc"))
    return layers


class ToyNet:
    """
    Weights are kept as plain arrays: conv weights N x C x R x S, FC weights
    M x K. ``masks`` holds the frozen non-zero pattern of pruned layers and
    ``status`` the pruning status each layer currently has.
    """

    def __init__(self, layers: Sequence[NamedLayer], weights: Dict[str, np.ndarray],
                 biases: Dict[str, np.ndarray]):
        self.layers = list(layers)
        self._check_chain()
        self.weights = weights
        self.biases = biases
        self.masks: Dict[str, Optional[np.ndarray]] = {layer.name: None for layer in self.layers}
        self.status: Dict[str, LayerStatus] = {layer.name: LayerStatus.ACTIVE for layer in self.layers}
        if self.parameter_count() > MAX_PARAMETERS:
            raise GeometryError(f"toy net has {self.parameter_count()} parameters, limit {MAX_PARAMETERS}")

    @classmethod
    def create(cls, seed: int, classes: int = 4, input_size: int = 12,
               channels: Sequence[int] = (8, 16), dtype=np.float32) -> "ToyNet":
        """He-initialized conv layers, small Gaussian FC, zero biases."""
        rng = np.random.default_rng(seed)
        layers = toynet_layers(classes, input_size, channels)
        weights, biases = {}, {}
        for layer in layers:
            spec = layer.spec
            if layer.kind == "conv":
                fan_in = spec.C * spec.R * spec.S
                w = rng.standard_normal(spec.weight_shape) * np.sqrt(2.0 / fan_in)
            else:
                w = rng.standard_normal((spec.N, spec.C)) * FC_INIT_STD
            weights[layer.name] = w.astype(dtype)
            biases[layer.name] = np.zeros(spec.N, dtype=dtype)
        return cls(layers, weights, biases)

    def _check_chain(self) -> None:
        convs = self.conv_layers
        if not convs or self.layers[-1].kind != "fc" or len(convs) != len(self.layers) - 1:
            raise GeometryError("toy net must be conv layers followed by one FC layer")
        for prev, nxt in zip(convs, convs[1:]):
            if prev.spec.output_shape != nxt.spec.input_shape:
                raise GeometryError(f"{prev.name} output {prev.spec.output_shape} does not feed {nxt.name}")
        flat = int(np.prod(convs[-1].spec.output_shape))
        if self.fc_layer.spec.C != flat:
            raise GeometryError(f"fc expects {self.fc_layer.spec.C} inputs, conv stack gives {flat}")

    @property
    def conv_layers(self) -> List[NamedLayer]:
        return [layer for layer in self.layers if layer.kind == "conv"]

    @property
    def fc_layer(self) -> NamedLayer:
        return self.layers[-1]

    @property
    def layer_ids(self) -> List[str]:
        return [layer.name for layer in self.layers]

    @property
    def classes(self) -> int:
        return self.fc_layer.spec.N

    def parameter_count(self) -> int:
        return int(sum(w.size for w in self.weights.values()) + sum(b.size for b in self.biases.values()))

    def densities(self) -> Dict[str, float]:
        return {name: float(np.count_nonzero(w)) / w.size for name, w in self.weights.items()}

    def astype(self, dtype) -> "ToyNet":
        net = ToyNet(
            self.layers,
            {k: v.astype(dtype) for k, v in self.weights.items()},
            {k: v.astype(dtype) for k, v in self.biases.items()},
        )
        net.masks = {k: None if m is None else m.copy() for k, m in self.masks.items()}
        net.status = dict(self.status)
        return net

    # ==================== Forward / backward ====================

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, list]:
        caches = []
        a = x
        for layer in self.conv_layers:
            pre, cols = conv_forward(a, self.weights[layer.name], self.biases[layer.name], layer.spec)
            caches.append((cols, pre))
            a = relu(pre)
        flat = a.reshape(a.shape[0], -1)
        caches.append(flat)
        logits = fc_forward(flat, self.weights[self.fc_layer.name], self.biases[self.fc_layer.name])
        return logits, caches

    def loss_and_grads(self, x: np.ndarray, labels: np.ndarray) -> Tuple[float, Dict[str, Tuple[np.ndarray, np.ndarray]]]:
        """Mean cross-entropy and {layer: (dW, db)}."""
        logits, caches = self.forward(x)
        loss, dlogits = softmax_cross_entropy(logits, labels)
        grads = {}

        fc = self.fc_layer
        dflat, dw, db = fc_backward(dlogits, caches[-1], self.weights[fc.name])
        grads[fc.name] = (dw, db)

        last = self.conv_layers[-1].spec
        da = dflat.reshape(x.shape[0], *last.output_shape)
        for layer, (cols, pre) in zip(reversed(self.conv_layers), reversed(caches[:-1])):
            dpre = relu_backward(da, pre)
            da, dw, db = conv_backward(dpre, cols, self.weights[layer.name], layer.spec)
            grads[layer.name] = (dw, db)
        return loss, grads

    def loss(self, x: np.ndarray, labels: np.ndarray) -> float:
        logits, _ = self.forward(x)
        return softmax_cross_entropy(logits, labels)[0]

    def predict(self, x: np.ndarray, sparse: bool = False) -> np.ndarray:
        """Class indices; ``sparse`` runs the direct sparse and SpMDM kernels."""
        if not sparse:
            return self.forward(x)[0].argmax(axis=1)
        a = np.asarray(x, dtype=np.float32)
        for layer in self.conv_layers:
            kernel = sparsify(Tensor4(self.weights[layer.name]), layer.spec)
            a = relu(conv_sparse_direct_batch(a, kernel, layer.spec, self.biases[layer.name]))
        fc = self.fc_layer
        logits = fc_spmdm(sparsify_matrix(self.weights[fc.name]), a.reshape(a.shape[0], -1).T,
                          self.biases[fc.name])
        return logits.T.argmax(axis=1)

    def accuracy(self, x: np.ndarray, labels: np.ndarray, sparse: bool = False) -> float:
        return float(np.mean(self.predict(x, sparse=sparse) == labels))
