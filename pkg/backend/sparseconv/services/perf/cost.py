"""
FLOP and byte accounting of a layer.
"""
from sparseconv.config import Config
from sparseconv.errors import ModelInputError
from sparseconv.models.layer import LayerSpec
from sparseconv.models.profile import LayerCost


def lowering_replication(spec: LayerSpec) -> float:
    """Elements of the im2col matrix per input element: C*R*S*H_out*W_out / (C*H_in*W_in)."""
    return (spec.R * spec.S * spec.H_out * spec.W_out) / float(spec.H_in * spec.W_in)


def layer_cost(spec: LayerSpec, batch: int = 1, *,
               count_padding: bool = True,
               lowered: bool = False,
               reload_weights_per_image: bool = False) -> LayerCost:
    """
    C = 2*N*C*R*S*H_out*W_out*batch, S_A = 4*batch*(input + N*H_out*W_out),
    S_W = 4*N*C*R*S.

    The input term is the zero-padded input the kernel streams unless
    ``count_padding`` is off; ``lowered`` scales the unpadded input by the
    im2col replication factor instead.
    """
    if batch < 1:
        raise ModelInputError(f"batch must be >= 1, got {batch}")
    word = Config.BYTES_PER_VALUE
    N, C, R, S = spec.weight_shape
    out_elems = N * spec.H_out * spec.W_out

    if lowered:
        in_elems = C * spec.H_in * spec.W_in * lowering_replication(spec)
    elif count_padding:
        in_elems = C * spec.H_pad * spec.W_pad
    else:
        in_elems = C * spec.H_in * spec.W_in

    weight_bytes = float(word * N * C * R * S)
    if reload_weights_per_image:
        weight_bytes *= batch

    return LayerCost(
        flops=2.0 * N * C * R * S * spec.H_out * spec.W_out * batch,
        activation_bytes=float(word * batch * (in_elems + out_elems)),
        weight_bytes=weight_bytes,
    )
