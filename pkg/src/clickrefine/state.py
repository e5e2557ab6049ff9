"""Carried state of one interactive segmentation session.

A session owns the image, the two probability maps fed back into the next
round (raw prediction and click-modulated prediction), the click list, and
an undo stack of full snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .interaction import Click


def _zero_maps(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    return np.zeros((h, w), np.float32), np.zeros((h, w), np.float32)


@dataclass
class SessionState:
    session_id: str
    image: np.ndarray                      # (3, H, W) float32 in [0, 1]
    m_prev: np.ndarray                     # (H, W) probability map
    m_mod: np.ndarray                      # (H, W) modulated probability map
    clicks: list[Click] = field(default_factory=list)
    history: list[tuple] = field(default_factory=list)
    gt: np.ndarray | None = None           # (H, W) bool, optional

    @property
    def shape(self) -> tuple[int, int]:
        return self.image.shape[1], self.image.shape[2]

    @property
    def round_index(self) -> int:
        return len(self.clicks)

    def push_snapshot(self) -> None:
        self.history.append((self.m_prev.copy(), self.m_mod.copy(),
                             tuple(self.clicks)))

    def undo(self) -> None:
        if not self.history:
            raise ValidationError("nothing to undo")
        prev, mod, clicks = self.history.pop()
        self.m_prev, self.m_mod = prev, mod
        self.clicks = list(clicks)


def new_session(session_id: str, image: np.ndarray,
                gt: np.ndarray | None = None) -> SessionState:
    """Fresh session: both carried maps start as all-zero matrices."""
    image = np.asarray(image, np.float32)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValidationError(f"expected a (3, H, W) image, got {image.shape}")
    h, w = image.shape[1], image.shape[2]
    if gt is not None:
        gt = np.asarray(gt, bool)
        if gt.shape != (h, w):
            raise ValidationError(f"gt shape {gt.shape} does not match {(h, w)}")
    prev, mod = _zero_maps(h, w)
    return SessionState(session_id=session_id, image=image, m_prev=prev,
                        m_mod=mod, gt=gt)
