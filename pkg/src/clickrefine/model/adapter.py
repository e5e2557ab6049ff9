"""Trainable adapter stages: early-block gating, detail extraction,
mask-input encoding, and the cross-attention fusion that yields the
high-resolution feature plane."""

from __future__ import annotations

from ..engine import (
    ParamSet,
    Tensor,
    avg_pool2d,
    concat,
    conv2d,
    deformable_conv2d,
    depthwise_conv2d,
    gelu,
    global_avg_pool,
    layer_norm,
    multi_head_attention,
    sigmoid,
    transposed_conv2d,
)
from ..errors import ShapeError
from .build import ife_pool_count, mask_path_widths
from .config import ModelConfig


def gated_early_fusion(f1: Tensor, f2: Tensor, params: ParamSet) -> Tensor:
    """Convex blend of two token sequences with a learned per-element gate.

    gate = sigmoid([f1 f2] W + b); output = gate*f1 + (1-gate)*f2, so every
    output element lies between the corresponding inputs.
    """
    if f1.shape != f2.shape:
        raise ShapeError(f"gated fusion inputs differ: {f1.shape} vs {f2.shape}")
    stacked = concat([f1, f2], axis=-1)
    gate = sigmoid(stacked @ params["early_fuse.gate.w"] + params["early_fuse.gate.b"])
    return gate * f1 + (1.0 - gate) * f2


def se_scale(x: Tensor, params: ParamSet, prefix: str) -> Tensor:
    """Squeeze-and-excite: rescale channels by a gate pooled from themselves."""
    pooled = global_avg_pool(x)
    hidden = gelu(pooled @ params[f"{prefix}.w1"] + params[f"{prefix}.b1"])
    gate = sigmoid(hidden @ params[f"{prefix}.w2"] + params[f"{prefix}.b2"])
    b, c = gate.shape
    return x * gate.reshape((b, c, 1, 1))


def _conv_residual(x: Tensor, params: ParamSet, prefix: str) -> Tensor:
    h = gelu(conv2d(x, params[f"{prefix}.conv1.w"], params[f"{prefix}.conv1.b"],
                    padding=1))
    h = conv2d(h, params[f"{prefix}.conv2.w"], params[f"{prefix}.conv2.b"], padding=1)
    return gelu(x + h)


def _deformable_residual(x: Tensor, params: ParamSet, prefix: str) -> Tensor:
    offsets = conv2d(x, params[f"{prefix}.off.w"], params[f"{prefix}.off.b"], padding=1)
    h = deformable_conv2d(x, params[f"{prefix}.conv.w"], offsets,
                          params[f"{prefix}.conv.b"], padding=1)
    h = se_scale(gelu(h), params, f"{prefix}.se")
    return gelu(x + h)


def image_feature_extract(image: Tensor, params: ParamSet,
                          config: ModelConfig) -> Tensor:
    """Convolutional detail path from RGB pixels down to the token grid.

    One plain residual stage, three deformable residual stages with SE
    gating, and a 1x1 projection; 2x poolings are interleaved after the
    leading stages until the spatial size matches the token grid.
    """
    pools_needed = ife_pool_count(config)
    x = gelu(conv2d(image, params["ife.stem.w"], params["ife.stem.b"], padding=1))
    done = 0
    if done < pools_needed:
        x = avg_pool2d(x, 2)
        done += 1
    x = _conv_residual(x, params, "ife.res")
    if done < pools_needed:
        x = avg_pool2d(x, 2)
        done += 1
    for i in range(3):
        x = _deformable_residual(x, params, f"ife.dcn{i}")
        if done < pools_needed:
            x = avg_pool2d(x, 2)
            done += 1
    if done < pools_needed:
        raise ShapeError(f"patch {config.patch} needs more pooling stages than exist")
    return conv2d(x, params["ife.proj.w"], params["ife.proj.b"])


def encode_mask_inputs(aux: Tensor, params: ParamSet, config: ModelConfig) -> Tensor:
    """Strided conv stack + depthwise-separable residual over the mask/click
    planes, producing a token-grid feature map.

    ``aux`` stacks (previous mask, modulated map, positive clicks, negative
    clicks); the channels are learned independently, so permuting them
    changes the output.
    """
    x = aux
    for i in range(len(mask_path_widths(config))):
        x = gelu(conv2d(x, params[f"maskpath.conv{i}.w"],
                        params[f"maskpath.conv{i}.b"], stride=2, padding=1))
    x = gelu(conv2d(x, params["maskpath.post.w"], params["maskpath.post.b"],
                    padding=1))
    h = depthwise_conv2d(x, params["maskpath.xc.dw.w"], params["maskpath.xc.dw.b"],
                         padding=1)
    h = conv2d(h, params["maskpath.xc.pw.w"], params["maskpath.xc.pw.b"])
    return gelu(x + h)


def feature_fusion(f_early: Tensor, f_ife: Tensor, params: ParamSet,
                   config: ModelConfig) -> tuple[Tensor, Tensor]:
    """Cross-attend the gated early tokens with the detail features, then
    lift the result to the 4x high-resolution plane.

    Returns ``(f_hq, refined_early)``.  The scalar ``fuse.theta`` scales the
    first cross-attention residual, so at theta=0 the refined early tokens
    are just their layer norm.
    """
    from .backbone import grid_to_tokens, tokens_to_grid

    theta = params["fuse.theta"]
    ife_tokens = grid_to_tokens(f_ife)
    early = f_early + theta * multi_head_attention(
        f_early, ife_tokens, ife_tokens, config.heads, params, "fuse.ca1")
    early = layer_norm(early, params["fuse.ln1.gain"], params["fuse.ln1.shift"])
    ife = ife_tokens + multi_head_attention(
        ife_tokens, early, early, config.heads, params, "fuse.ca2")
    ife = layer_norm(ife, params["fuse.ln2.gain"], params["fuse.ln2.shift"])

    grid = tokens_to_grid(ife, config.grid)
    up = transposed_conv2d(grid, params["fuse.up1.w"], stride=2)
    up = gelu(layer_norm(up, params["fuse.upln.gain"], params["fuse.upln.shift"],
                         axis=1))
    f_hq = transposed_conv2d(up, params["fuse.up2.w"], stride=2)
    return f_hq, early
