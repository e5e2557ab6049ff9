"""Token decoder and the per-sample dynamic convolution head."""

from __future__ import annotations

import numpy as np

from ..engine import (
    DEFAULT_DTYPE,
    ParamSet,
    Tensor,
    concat,
    conv2d,
    gelu,
    multi_head_attention,
    resize_bilinear,
    transposed_conv2d,
)
from ..errors import ShapeError
from .backbone import _mlp, _norm, grid_to_tokens, tokens_to_grid
from .config import ModelConfig


def dense_fusion(f_mask: Tensor, vit_tokens: Tensor | None, params: ParamSet,
                 config: ModelConfig) -> Tensor:
    """1x1-conv merge of the mask-path grid with the final backbone grid.

    Passing ``vit_tokens=None`` replaces the backbone contribution with
    zeros — the switch that cuts the trunk out of the decoder path.
    """
    if vit_tokens is None:
        vit_grid = Tensor(np.zeros(f_mask.shape, DEFAULT_DTYPE))
    else:
        vit_grid = tokens_to_grid(vit_tokens, config.grid)
    x = concat([f_mask, vit_grid], axis=1)
    x = gelu(conv2d(x, params["dfc.conv1.w"], params["dfc.conv1.b"]))
    return grid_to_tokens(conv2d(x, params["dfc.conv2.w"], params["dfc.conv2.b"]))


def apply_dynamic_conv(f_final: Tensor, weights: Tensor, bias: Tensor,
                       config: ModelConfig) -> Tensor:
    """Convolve each sample's feature plane with that sample's own kernel.

    ``weights`` is (B, hq_out_dim*k*k) and ``bias`` (B, 1); the output is a
    one-channel logit map at the feature plane's resolution.  For fixed
    weights this is affine in ``f_final``: f(a+b) = f(a) + f(b) - bias_map.
    """
    k = config.dyn_kernel
    hq = config.hq_out_dim
    batch = f_final.shape[0]
    if weights.shape != (batch, hq * k * k) or bias.shape != (batch, 1):
        raise ShapeError(
            f"dynamic head got weights {weights.shape}, bias {bias.shape}"
        )
    rows = []
    for b in range(batch):
        w_b = weights[b:b + 1].reshape((1, hq, k, k))
        bias_b = bias[b:b + 1].reshape((1,))
        rows.append(conv2d(f_final[b:b + 1], w_b, bias_b, padding=k // 2))
    return concat(rows, axis=0)


def _upsample4(grid: Tensor, params: ParamSet, prefix: str) -> Tensor:
    up = transposed_conv2d(grid, params[f"{prefix}.up1.w"], stride=2)
    up = gelu(_norm(up, params, f"{prefix}.upln", axis=1))
    return transposed_conv2d(up, params[f"{prefix}.up2.w"], stride=2)


def decoder_forward(f_mask: Tensor, vit_tokens: Tensor | None, f_multiscale: Tensor,
                    f_hq: Tensor | None, params: ParamSet, config: ModelConfig) -> Tensor:
    """Run the query/feature attention stack and emit full-resolution logits.

    Each layer refines the queries against the fused features (cross-attn,
    self-attn, feed-forward) and then refines the features against the
    queries.  The feature branch is lifted 4x and added to the pyramid and
    high-resolution planes; the token branch produces the dynamic kernel.
    ``f_hq=None`` drops the high-resolution additive term.
    """
    feats = dense_fusion(f_mask, vit_tokens, params, config)
    batch = f_mask.shape[0]
    q = params["query.tokens"] + Tensor(
        np.zeros((batch,) + params["query.tokens"].shape, DEFAULT_DTYPE))

    for i in range(config.decoder_layers):
        p = f"dec.{i}"
        q = _norm(q + multi_head_attention(q, feats, feats, config.heads,
                                           params, f"{p}.ca_q"), params, f"{p}.ln_q")
        q = _norm(q + multi_head_attention(q, q, q, config.heads,
                                           params, f"{p}.sa"), params, f"{p}.ln_sa")
        q = _norm(q + _mlp(q, params, f"{p}.ffn"), params, f"{p}.ln_ffn")
        feats = _norm(feats + multi_head_attention(feats, q, q, config.heads,
                                                   params, f"{p}.ca_f"),
                      params, f"{p}.ln_f")

    lifted = _upsample4(tokens_to_grid(feats, config.grid), params, "dec")
    if f_multiscale.shape != lifted.shape:
        raise ShapeError(
            f"additive fusion mismatch: pyramid {f_multiscale.shape} vs "
            f"decoder {lifted.shape}"
        )
    f_final = f_multiscale + lifted
    if f_hq is not None:
        if f_hq.shape != lifted.shape:
            raise ShapeError(
                f"additive fusion mismatch: high-res {f_hq.shape} vs "
                f"decoder {lifted.shape}"
            )
        f_final = f_final + f_hq

    t = _norm(q + multi_head_attention(q, feats, feats, config.heads,
                                       params, "dec.final_ca"),
              params, "dec.final_ln")
    q_final = t + _mlp(t, params, "dec.final_mlp")

    k = config.dyn_kernel
    hq = config.hq_out_dim
    wb = _mlp(q_final, params, "head.mlp")[:, 0:1, :].reshape(
        (batch, hq * k * k + 1))
    logits = apply_dynamic_conv(f_final, wb[:, :hq * k * k],
                                wb[:, hq * k * k:], config)
    r = config.input_resolution
    return resize_bilinear(logits, r, r)
