"""End-to-end network composition, inference, and checkpoint files."""

from __future__ import annotations

import os

import numpy as np

from ..engine import ParamSet, Tensor, resize_bilinear, sigmoid
from ..errors import ValidationError
from ..interaction import Click, encode_clicks, scaled_disk_radius
from ..state import SessionState
from .adapter import (
    encode_mask_inputs,
    feature_fusion,
    gated_early_fusion,
    image_feature_extract,
)
from .backbone import backbone_forward, simple_fpn, tokens_to_grid
from .build import build_params
from .config import ModelConfig
from .decoder import decoder_forward


def forward_logits(image: Tensor, aux: Tensor, params: ParamSet,
                   config: ModelConfig, use_backbone_tokens: bool = True,
                   use_fine_features: bool = True) -> Tensor:
    """Full forward pass to (B, 1, R, R) logits at the working resolution.

    The two switches cut single data paths: ``use_backbone_tokens`` feeds
    the final trunk tokens into the decoder's feature fusion, and
    ``use_fine_features`` adds the high-resolution plane into the output
    head.  Everything else is untouched in either setting.
    """
    taps = backbone_forward(image, aux, params, config)
    f_early = gated_early_fusion(taps.early_a, taps.early_b, params)
    f_multiscale = simple_fpn(tokens_to_grid(taps.final, config.grid),
                              params, config)
    f_ife = image_feature_extract(image, params, config)
    f_hq, _ = feature_fusion(f_early, f_ife, params, config)
    f_mask = encode_mask_inputs(aux, params, config)
    return decoder_forward(
        f_mask,
        taps.final if use_backbone_tokens else None,
        f_multiscale,
        f_hq if use_fine_features else None,
        params,
        config,
    )


def _scale_clicks(clicks: list[Click], h: int, w: int, side: int) -> list[Click]:
    scaled = []
    for c in clicks:
        x = min(side - 1, int((c.x + 0.5) * side / w))
        y = min(side - 1, int((c.y + 0.5) * side / h))
        scaled.append(Click(x=x, y=y, kind=c.kind, ordinal=c.ordinal))
    return scaled


def _to_working(plane: np.ndarray, side: int) -> np.ndarray:
    t = Tensor(np.asarray(plane, np.float32)[None, None])
    return resize_bilinear(t, side, side).data[0, 0]


def session_inputs(session: SessionState, config: ModelConfig
                   ) -> tuple[Tensor, Tensor]:
    """Resample a session's image and carried maps to the model resolution
    and stamp its clicks, returning the (1,3,R,R) and (1,4,R,R) inputs."""
    h, w = session.shape
    side = config.input_resolution
    image = resize_bilinear(Tensor(session.image[None]), side, side)
    planes = encode_clicks(_scale_clicks(session.clicks, h, w, side),
                           side, side, scaled_disk_radius(side))
    aux = np.stack([
        _to_working(session.m_prev, side),
        _to_working(session.m_mod, side),
        planes[0],
        planes[1],
    ])[None]
    return image, Tensor(aux.astype(np.float32))


def predict(session: SessionState, params: ParamSet, config: ModelConfig,
            use_backbone_tokens: bool = True,
            use_fine_features: bool = True) -> np.ndarray:
    """Probability map for the session's image at its native resolution."""
    image, aux = session_inputs(session, config)
    logits = forward_logits(image, aux, params, config,
                            use_backbone_tokens=use_backbone_tokens,
                            use_fine_features=use_fine_features)
    h, w = session.shape
    probs = sigmoid(resize_bilinear(logits, h, w))
    return np.clip(probs.data[0, 0], 0.0, 1.0).astype(np.float32)


def save_checkpoint(path: str, params: ParamSet, config: ModelConfig) -> None:
    """One directory holding the weight blob and a JSON config block."""
    params.save(path)
    config.save(os.path.join(path, "config.json"))


def load_checkpoint(path: str) -> tuple[ParamSet, ModelConfig]:
    """Load weights + config, validating every entry shape against a fresh
    build from the config."""
    config = ModelConfig.load(os.path.join(path, "config.json"))
    params = ParamSet.load(path)
    reference = build_params(config)
    names = set(params.names())
    expected = set(reference.names())
    if names != expected:
        missing = sorted(expected - names)[:3]
        extra = sorted(names - expected)[:3]
        raise ValidationError(
            f"checkpoint entries do not match config (missing {missing}, "
            f"unexpected {extra})"
        )
    for name in expected:
        got, want = params[name].shape, reference[name].shape
        if got != want:
            raise ValidationError(f"{name}: shape {got}, config implies {want}")
        if params[name].requires_grad != reference[name].requires_grad:
            raise ValidationError(f"{name}: trainable flag mismatch")
    return params, config
