"""Overlap and click-count metrics for the interactive benchmark."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError, ValidationError


def iou(pred: np.ndarray, gt: np.ndarray) -> float:
    """Intersection over union of two binary masks; 1.0 when both empty."""
    pred = np.asarray(pred) != 0
    gt = np.asarray(gt) != 0
    if pred.shape != gt.shape:
        raise ShapeError(f"pred {pred.shape} vs gt {gt.shape}")
    union = int(np.count_nonzero(pred | gt))
    if union == 0:
        return 1.0
    return int(np.count_nonzero(pred & gt)) / union


def clicks_to_reach(curve, threshold: float, cap: int) -> int:
    """First 1-based click index whose IoU meets ``threshold``, else ``cap``."""
    for i, value in enumerate(curve, start=1):
        if value >= threshold:
            return i
    return cap


def noc(curves, threshold: float, cap: int) -> float:
    """Mean number of clicks to reach ``threshold``, capped per instance."""
    if len(curves) == 0:
        raise ValidationError("noc needs at least one curve")
    return float(np.mean([clicks_to_reach(c, threshold, cap) for c in curves]))


def miou_curve(curves) -> list[float]:
    """Per-click-index mean IoU across instances."""
    if len(curves) == 0:
        raise ValidationError("miou_curve needs at least one curve")
    lengths = {len(c) for c in curves}
    if len(lengths) != 1:
        raise ShapeError(f"curves have mixed lengths {sorted(lengths)}")
    return [float(v) for v in np.mean(np.asarray(curves, dtype=np.float64), axis=0)]
