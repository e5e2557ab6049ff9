"""Segmentation network: frozen trunk plus trainable refinement adapter."""

from .adapter import (
    encode_mask_inputs,
    feature_fusion,
    gated_early_fusion,
    image_feature_extract,
    se_scale,
)
from .backbone import (
    BackboneTaps,
    backbone_forward,
    grid_to_tokens,
    simple_fpn,
    tokens_to_grid,
    transformer_block,
)
from .build import build_params, ife_pool_count, mask_path_widths
from .config import ModelConfig
from .decoder import apply_dynamic_conv, decoder_forward, dense_fusion
from .network import (
    forward_logits,
    load_checkpoint,
    predict,
    save_checkpoint,
    session_inputs,
)

__all__ = [
    "BackboneTaps",
    "ModelConfig",
    "apply_dynamic_conv",
    "backbone_forward",
    "build_params",
    "decoder_forward",
    "dense_fusion",
    "encode_mask_inputs",
    "feature_fusion",
    "forward_logits",
    "gated_early_fusion",
    "grid_to_tokens",
    "ife_pool_count",
    "image_feature_extract",
    "load_checkpoint",
    "mask_path_widths",
    "predict",
    "save_checkpoint",
    "se_scale",
    "session_inputs",
    "simple_fpn",
    "tokens_to_grid",
    "transformer_block",
]
