"""Parameter construction: shapes, init distributions, freeze flags.

The backbone group (patch embeddings, transformer blocks, feature
pyramid) is frozen; everything the adapter adds on top is trainable.
Initialization is seeded and drawn in a fixed order, so two builds from
the same seed are bit-identical.
"""

from __future__ import annotations

import numpy as np

from ..engine import ParamSet
from .config import ModelConfig

F32 = np.float32


def _normal(rng, shape, std):
    return (rng.standard_normal(shape) * std).astype(F32)


def _conv_init(rng, out_ch, in_ch, k):
    std = np.sqrt(2.0 / (in_ch * k * k))
    return _normal(rng, (out_ch, in_ch, k, k), std)


def _tconv_init(rng, in_ch, out_ch, k):
    std = np.sqrt(2.0 / (in_ch * k * k))
    return _normal(rng, (in_ch, out_ch, k, k), std)


def _zeros(shape):
    return np.zeros(shape, F32)


def _ones(shape):
    return np.ones(shape, F32)


def _add_layer_norm(ps, prefix, dim, trainable):
    ps.add(f"{prefix}.gain", _ones((dim,)), trainable)
    ps.add(f"{prefix}.shift", _zeros((dim,)), trainable)


def _add_attention(ps, prefix, rng, dim, trainable, std=0.02):
    for name in ("wq", "wk", "wv", "wo"):
        ps.add(f"{prefix}.{name}", _normal(rng, (dim, dim), std), trainable)
    for name in ("bq", "bk", "bv", "bo"):
        ps.add(f"{prefix}.{name}", _zeros((dim,)), trainable)


def _add_mlp(ps, prefix, rng, dim, hidden, trainable, out_dim=None, out_std=0.02):
    out_dim = dim if out_dim is None else out_dim
    ps.add(f"{prefix}.w1", _normal(rng, (dim, hidden), 0.02), trainable)
    ps.add(f"{prefix}.b1", _zeros((hidden,)), trainable)
    ps.add(f"{prefix}.w2", _normal(rng, (hidden, out_dim), out_std), trainable)
    ps.add(f"{prefix}.b2", _zeros((out_dim,)), trainable)


def mask_path_widths(config: ModelConfig) -> list[int]:
    """Channel widths of the strided mask-encoder convs, one per halving."""
    n = int(np.log2(config.patch))
    return [min(config.embed_dim, 8 << i) for i in range(n)]


def ife_pool_count(config: ModelConfig) -> int:
    """Number of 2x poolings the detail extractor needs to reach the
    token grid."""
    return int(np.log2(config.patch))


def build_params(config: ModelConfig, seed: int = 0) -> ParamSet:
    rng = np.random.default_rng(seed)
    ps = ParamSet()
    d = config.embed_dim
    hq = config.hq_out_dim
    tokens = config.grid * config.grid

    # -- frozen backbone ----------------------------------------------------
    ps.add("embed.image.w", _conv_init(rng, d, 3, config.patch), False)
    ps.add("embed.image.b", _zeros((d,)), False)
    ps.add("embed.aux.w", _conv_init(rng, d, 4, config.patch), False)
    ps.add("embed.aux.b", _zeros((d,)), False)
    ps.add("embed.pos", _normal(rng, (tokens, d), 0.02), False)
    for i in range(config.depth):
        _add_layer_norm(ps, f"vit.{i}.ln1", d, False)
        _add_attention(ps, f"vit.{i}.attn", rng, d, False)
        _add_layer_norm(ps, f"vit.{i}.ln2", d, False)
        _add_mlp(ps, f"vit.{i}.mlp", rng, d, config.mlp_dim, False)

    # Pyramid branches at strides {1/4, 1/2, 1, 2} of the token grid.
    # Bias-free convs and identity-initialized norms keep the whole
    # pyramid an exactly-zero map for a zero input.
    ps.add("fpn.0.up1.w", _tconv_init(rng, d, d // 2, 2), False)
    _add_layer_norm(ps, "fpn.0.upln", d // 2, False)
    ps.add("fpn.0.up2.w", _tconv_init(rng, d // 2, d // 4, 2), False)
    ps.add("fpn.1.up1.w", _tconv_init(rng, d, d // 2, 2), False)
    branch_in = (d // 4, d // 2, d, d)
    for i, width in enumerate(config.fpn_dims):
        ps.add(f"fpn.{i}.lat.w", _conv_init(rng, width, branch_in[i], 1), False)
        _add_layer_norm(ps, f"fpn.{i}.ln1", width, False)
        ps.add(f"fpn.{i}.conv.w", _conv_init(rng, width, width, 3), False)
        _add_layer_norm(ps, f"fpn.{i}.ln2", width, False)
        ps.add(f"fpn.{i}.proj.w", _conv_init(rng, hq, width, 1), False)

    # -- trainable adapter --------------------------------------------------
    ps.add("early_fuse.gate.w", _normal(rng, (2 * d, d), 0.02), True)
    ps.add("early_fuse.gate.b", _zeros((d,)), True)

    ps.add("ife.stem.w", _conv_init(rng, d, 3, 3), True)
    ps.add("ife.stem.b", _zeros((d,)), True)
    for half in ("conv1", "conv2"):
        ps.add(f"ife.res.{half}.w", _conv_init(rng, d, d, 3), True)
        ps.add(f"ife.res.{half}.b", _zeros((d,)), True)
    for i in range(3):
        # Offset maps start small but nonzero: sampling positions sit away
        # from the bilinear kinks at exact integers.
        ps.add(f"ife.dcn{i}.off.w", _normal(rng, (18, d, 3, 3), 0.01), True)
        ps.add(f"ife.dcn{i}.off.b",
               rng.uniform(-0.25, 0.25, (18,)).astype(F32), True)
        ps.add(f"ife.dcn{i}.conv.w", _conv_init(rng, d, d, 3), True)
        ps.add(f"ife.dcn{i}.conv.b", _zeros((d,)), True)
        ps.add(f"ife.dcn{i}.se.w1", _normal(rng, (d, d // 4), 0.1), True)
        ps.add(f"ife.dcn{i}.se.b1", _zeros((d // 4,)), True)
        ps.add(f"ife.dcn{i}.se.w2", _normal(rng, (d // 4, d), 0.1), True)
        ps.add(f"ife.dcn{i}.se.b2", _zeros((d,)), True)
    ps.add("ife.proj.w", _conv_init(rng, d, d, 1), True)
    ps.add("ife.proj.b", _zeros((d,)), True)

    ps.add("fuse.theta", np.asarray(1.0, F32), True)
    _add_attention(ps, "fuse.ca1", rng, d, True)
    _add_layer_norm(ps, "fuse.ln1", d, True)
    _add_attention(ps, "fuse.ca2", rng, d, True)
    _add_layer_norm(ps, "fuse.ln2", d, True)
    ps.add("fuse.up1.w", _tconv_init(rng, d, hq, 2), True)
    _add_layer_norm(ps, "fuse.upln", hq, True)
    ps.add("fuse.up2.w", _tconv_init(rng, hq, hq, 2), True)

    widths = mask_path_widths(config)
    prev = 4
    for i, width in enumerate(widths):
        ps.add(f"maskpath.conv{i}.w", _conv_init(rng, width, prev, 3), True)
        ps.add(f"maskpath.conv{i}.b", _zeros((width,)), True)
        prev = width
    ps.add("maskpath.post.w", _conv_init(rng, d, prev, 3), True)
    ps.add("maskpath.post.b", _zeros((d,)), True)
    ps.add("maskpath.xc.dw.w", _normal(rng, (d, 3, 3), np.sqrt(2.0 / 9)), True)
    ps.add("maskpath.xc.dw.b", _zeros((d,)), True)
    ps.add("maskpath.xc.pw.w", _conv_init(rng, d, d, 1), True)
    ps.add("maskpath.xc.pw.b", _zeros((d,)), True)

    ps.add("dfc.conv1.w", _conv_init(rng, d, 2 * d, 1), True)
    ps.add("dfc.conv1.b", _zeros((d,)), True)
    ps.add("dfc.conv2.w", _conv_init(rng, d, d, 1), True)
    ps.add("dfc.conv2.b", _zeros((d,)), True)

    ps.add("query.tokens", _normal(rng, (config.token_count, d), 0.02), True)
    for i in range(config.decoder_layers):
        _add_attention(ps, f"dec.{i}.ca_q", rng, d, True)
        _add_layer_norm(ps, f"dec.{i}.ln_q", d, True)
        _add_attention(ps, f"dec.{i}.sa", rng, d, True)
        _add_layer_norm(ps, f"dec.{i}.ln_sa", d, True)
        _add_mlp(ps, f"dec.{i}.ffn", rng, d, config.mlp_dim, True)
        _add_layer_norm(ps, f"dec.{i}.ln_ffn", d, True)
        _add_attention(ps, f"dec.{i}.ca_f", rng, d, True)
        _add_layer_norm(ps, f"dec.{i}.ln_f", d, True)
    ps.add("dec.up1.w", _tconv_init(rng, d, hq, 2), True)
    _add_layer_norm(ps, "dec.upln", hq, True)
    ps.add("dec.up2.w", _tconv_init(rng, hq, hq, 2), True)
    _add_attention(ps, "dec.final_ca", rng, d, True)
    _add_layer_norm(ps, "dec.final_ln", d, True)
    _add_mlp(ps, "dec.final_mlp", rng, d, config.mlp_dim, True)

    k = config.dyn_kernel
    # Small final init keeps the first prediction near probability 0.5.
    _add_mlp(ps, "head.mlp", rng, d, config.mlp_dim, True,
             out_dim=hq * k * k + 1, out_std=0.002)
    return ps
