"""
Toy net checkpoints: one SCKT file per weight and bias plus a layer manifest.
"""
import json
from pathlib import Path
from typing import Union

import numpy as np

from sparseconv.errors import CodecError
from sparseconv.models.layer import NamedLayer
from sparseconv.models.tensor import Tensor3, Tensor4
from sparseconv.services.tensor.codec import load_tensor, save_tensor
from sparseconv.services.train.toynet import ToyNet

MANIFEST = "layers.json"


def _file_stem(layer_id: str) -> str:
    return layer_id.replace("/", "_")


def save_checkpoint(net: ToyNet, directory: Union[str, Path]) -> Path:
    """FC weights are stored as M x K x 1 x 1, biases as 1 x 1 x N."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for layer in net.layers:
        w = net.weights[layer.name]
        if w.ndim == 2:
            w = w.reshape(*w.shape, 1, 1)
        stem = _file_stem(layer.name)
        save_tensor(directory / f"{stem}.weights.sckt", Tensor4(w))
        save_tensor(directory / f"{stem}.bias.sckt", Tensor3(net.biases[layer.name].reshape(1, 1, -1)))
    manifest = [layer.model_dump() for layer in net.layers]
    (directory / MANIFEST).write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return directory


def load_checkpoint(directory: Union[str, Path]) -> ToyNet:
    directory = Path(directory)
    try:
        manifest = json.loads((directory / MANIFEST).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise CodecError(str(directory / MANIFEST), f"cannot read checkpoint manifest: {e}") from e

    layers = [NamedLayer.model_validate(entry) for entry in manifest]
    weights, biases = {}, {}
    for layer in layers:
        stem = _file_stem(layer.name)
        w = load_tensor(directory / f"{stem}.weights.sckt")
        b = load_tensor(directory / f"{stem}.bias.sckt")
        if w.shape != layer.spec.weight_shape:
            raise CodecError(str(directory), f"{layer.name}: stored weights {w.shape} != {layer.spec.weight_shape}")
        data = np.array(w.data)
        weights[layer.name] = data.reshape(layer.spec.N, layer.spec.C) if layer.kind == "fc" else data
        biases[layer.name] = np.array(b.data).reshape(-1)
    return ToyNet(layers, weights, biases)
