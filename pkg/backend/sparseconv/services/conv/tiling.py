"""
Loop tiling parameters of the sparse kernels.
"""
from dataclasses import dataclass
from typing import Optional

from pydantic import BaseModel, ConfigDict, PositiveInt

from sparseconv.config import Config
from sparseconv.models.layer import LayerSpec


@dataclass(frozen=True)
class ResolvedTiling:
    output_channel_tile: int
    block_h: int
    block_w: int
    column_block: int


class TilingConfig(BaseModel):
    """
    Output-channel tile, spatial register block and column block.

    Sizes need not divide the layer extents. ``register_block_w`` left unset
    selects 1 x W_out when W_out <= TILE_REGISTER_MAX_ROW, else 1 x
    TILE_REGISTER_WIDTH.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    output_channel_tile: PositiveInt = Config.TILE_OUTPUT_CHANNELS
    register_block_h: PositiveInt = 1
    register_block_w: Optional[PositiveInt] = None
    column_block: PositiveInt = Config.TILE_COLUMN_BLOCK

    def resolve(self, spec: LayerSpec) -> ResolvedTiling:
        if self.register_block_w is not None:
            block_w = self.register_block_w
        elif spec.W_out <= Config.TILE_REGISTER_MAX_ROW:
            block_w = spec.W_out
        else:
            block_w = Config.TILE_REGISTER_WIDTH
        return ResolvedTiling(
            output_channel_tile=min(self.output_channel_tile, spec.N),
            block_h=min(self.register_block_h, spec.H_out),
            block_w=min(block_w, spec.W_out),
            column_block=min(self.column_block, spec.C),
        )
