"""Focal-reweighted cross-entropy, normalized by the total focal weight."""

from __future__ import annotations

import numpy as np

from ..engine import Tensor, as_tensor, mean, power, sigmoid, softplus, sum_
from ..errors import ShapeError


def normalized_focal_loss(logits: Tensor, gt: np.ndarray, gamma: float = 2.0) -> Tensor:
    """Σ (1-p_t)^γ · (-log p_t) / Σ (1-p_t)^γ over every pixel.

    ``p_t`` is the predicted probability of the true class.  Hard pixels
    (p_t small) dominate; as predictions approach the mask the weights
    shrink together, and the normalization keeps the scale comparable
    across difficulty levels.  γ=0 is exactly mean binary cross-entropy.
    """
    logits = as_tensor(logits)
    gt = np.asarray(gt, bool)
    if logits.shape != gt.shape:
        raise ShapeError(f"logits {logits.shape} vs mask {gt.shape}")
    sign = np.where(gt, 1.0, -1.0).astype(logits.data.dtype)
    margin = logits * Tensor(sign)
    per_pixel = softplus(-margin)          # = -log p_t, stable at any logit
    if gamma == 0.0:
        return mean(per_pixel)
    weights = power(sigmoid(-margin), gamma)   # = (1 - p_t)^γ
    return sum_(weights * per_pixel) / sum_(weights)
