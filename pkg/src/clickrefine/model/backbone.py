"""Frozen trunk: patch embeddings, transformer blocks, feature pyramid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..engine import (
    ParamSet,
    Tensor,
    avg_pool2d,
    concat,
    conv2d,
    gelu,
    layer_norm,
    multi_head_attention,
    resize_bilinear,
    transposed_conv2d,
)
from ..errors import ShapeError
from .config import ModelConfig


@dataclass
class BackboneTaps:
    """The three transformer outputs the adapter consumes: two early
    blocks and the final block, all (B, tokens, dim)."""

    early_a: Tensor
    early_b: Tensor
    final: Tensor


def tokens_to_grid(tokens: Tensor, grid: int) -> Tensor:
    """(B, g*g, D) -> (B, D, g, g)."""
    b, t, d = tokens.shape
    if t != grid * grid:
        raise ShapeError(f"{t} tokens do not tile a {grid}x{grid} grid")
    return tokens.transpose((0, 2, 1)).reshape((b, d, grid, grid))


def grid_to_tokens(feature_map: Tensor) -> Tensor:
    """(B, D, H, W) -> (B, H*W, D)."""
    b, d, h, w = feature_map.shape
    return feature_map.reshape((b, d, h * w)).transpose((0, 2, 1))


def _norm(x: Tensor, params: ParamSet, prefix: str, axis: int = -1) -> Tensor:
    return layer_norm(x, params[f"{prefix}.gain"], params[f"{prefix}.shift"], axis=axis)


def _mlp(x: Tensor, params: ParamSet, prefix: str) -> Tensor:
    h = gelu(x @ params[f"{prefix}.w1"] + params[f"{prefix}.b1"])
    return h @ params[f"{prefix}.w2"] + params[f"{prefix}.b2"]


def transformer_block(x: Tensor, params: ParamSet, prefix: str, heads: int) -> Tensor:
    h = _norm(x, params, f"{prefix}.ln1")
    x = x + multi_head_attention(h, h, h, heads, params, f"{prefix}.attn")
    h = _norm(x, params, f"{prefix}.ln2")
    return x + _mlp(h, params, f"{prefix}.mlp")


def backbone_forward(image: Tensor, aux: Tensor, params: ParamSet,
                     config: ModelConfig) -> BackboneTaps:
    """Run the frozen trunk over an image and its mask/click planes.

    Both inputs are patch-embedded separately and summed into one token
    sequence.  ``aux`` stacks (previous mask, modulated map, positive
    click map, negative click map) at the input resolution.
    """
    if image.shape[1] != 3 or aux.shape[1] != 4:
        raise ShapeError(f"expected 3+4 channels, got {image.shape[1]}+{aux.shape[1]}")
    r = config.input_resolution
    if image.shape[2:] != (r, r) or aux.shape[2:] != (r, r):
        raise ShapeError(
            f"input {image.shape[2:]}/{aux.shape[2:]} does not match configured "
            f"resolution {r}x{r}"
        )
    p = config.patch
    img_tok = grid_to_tokens(conv2d(image, params["embed.image.w"],
                                    params["embed.image.b"], stride=p))
    aux_tok = grid_to_tokens(conv2d(aux, params["embed.aux.w"],
                                    params["embed.aux.b"], stride=p))
    x = img_tok + aux_tok + params["embed.pos"]

    taps: dict[int, Tensor] = {}
    for i in range(config.depth):
        x = transformer_block(x, params, f"vit.{i}", config.heads)
        taps[i] = x
    a, b = config.early_block_indices
    return BackboneTaps(early_a=taps[a], early_b=taps[b], final=taps[config.depth - 1])


def _pyramid_branch(x: Tensor, params: ParamSet, index: int, config: ModelConfig) -> Tensor:
    """Lateral 1x1 + 3x3 refinement, then projection to the shared width."""
    x = conv2d(x, params[f"fpn.{index}.lat.w"])
    x = _norm(x, params, f"fpn.{index}.ln1", axis=1)
    x = conv2d(x, params[f"fpn.{index}.conv.w"], padding=1)
    x = _norm(x, params, f"fpn.{index}.ln2", axis=1)
    return conv2d(x, params[f"fpn.{index}.proj.w"])


def simple_fpn(final_grid: Tensor, params: ParamSet, config: ModelConfig) -> Tensor:
    """Four scales from the last token grid, fused at 4x resolution.

    Branches sit at strides {1/4, 1/2, 1, 2} of the token grid; each is
    refined, projected to ``hq_out_dim``, resampled to the 4x plane, and
    summed.  Everything here is linear or gated through GELU with no
    biases, so a zero input produces an exactly-zero output.
    """
    up = transposed_conv2d(final_grid, params["fpn.0.up1.w"], stride=2)
    up = gelu(_norm(up, params, "fpn.0.upln", axis=1))
    quarter = transposed_conv2d(up, params["fpn.0.up2.w"], stride=2)
    half = transposed_conv2d(final_grid, params["fpn.1.up1.w"], stride=2)
    scales = [quarter, half, final_grid, avg_pool2d(final_grid, 2)]

    side = config.hq_grid
    total = None
    for i, feature in enumerate(scales):
        branch = _pyramid_branch(feature, params, i, config)
        if branch.shape[2] != side:
            branch = resize_bilinear(branch, side, side)
        total = branch if total is None else total + branch
    return total
