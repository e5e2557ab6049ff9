"""Clicks, click-map encoding, and the automatic click simulator.

A click is a labelled pixel: positive clicks mark missing foreground,
negative clicks mark wrongly claimed background.  The simulator plays a
user who always clicks the deepest interior pixel of the larger error
region, which is also how training clicks beyond the first round are
produced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ShapeError, ValidationError
from .seeding import seed_key

POSITIVE = 1
NEGATIVE = 0

# Disk radius used when stamping clicks at the reference input scale.
BASE_DISK_RADIUS = 5
BASE_INPUT_SIDE = 448

MAX_CLICKS = 24


@dataclass(frozen=True)
class Click:
    """One user interaction: pixel location, polarity, and round number."""

    x: int
    y: int
    kind: int           # POSITIVE or NEGATIVE
    ordinal: int

    def is_positive(self) -> bool:
        return self.kind == POSITIVE


def click_to_json(click: Click) -> dict:
    return {
        "x": int(click.x),
        "y": int(click.y),
        "kind": "pos" if click.kind == POSITIVE else "neg",
        "ordinal": int(click.ordinal),
    }


def click_from_json(obj: dict) -> Click:
    kind = obj.get("kind")
    if kind not in ("pos", "neg"):
        raise ValidationError(f"click kind must be 'pos' or 'neg', got {kind!r}")
    return Click(x=int(obj["x"]), y=int(obj["y"]),
                 kind=POSITIVE if kind == "pos" else NEGATIVE,
                 ordinal=int(obj["ordinal"]))


def scaled_disk_radius(h: int) -> int:
    """Stamp radius proportional to image height, never below one pixel."""
    return max(1, round(BASE_DISK_RADIUS * h / BASE_INPUT_SIDE))


def _disk_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    r = int(radius)
    span = np.arange(-r, r + 1)
    dy, dx = np.meshgrid(span, span, indexing="ij")
    keep = dy * dy + dx * dx <= r * r
    return dy[keep], dx[keep]


def encode_clicks(clicks: list[Click], h: int, w: int, disk_radius: int) -> np.ndarray:
    """Stamp clicks as filled disks into a (2, H, W) map.

    Channel 0 collects positive clicks, channel 1 negative ones.  Disks
    are clipped at the image border; values are exactly 0 or 1.
    """
    out = np.zeros((2, h, w), dtype=np.float32)
    if not clicks:
        return out
    dy, dx = _disk_offsets(disk_radius)
    for c in clicks:
        if not (0 <= c.x < w and 0 <= c.y < h):
            raise ValidationError(f"click ({c.x}, {c.y}) outside {w}x{h} image")
        ys = c.y + dy
        xs = c.x + dx
        inside = (ys >= 0) & (ys < h) & (xs >= 0) & (xs < w)
        channel = 0 if c.kind == POSITIVE else 1
        out[channel, ys[inside], xs[inside]] = 1.0
    return out


def distance_transform(mask: np.ndarray) -> np.ndarray:
    """Euclidean distance from each 1-pixel to the nearest 0-pixel.

    The image frame counts as background, so a mask of all ones still has
    a well-defined interior peak.  Zero pixels map to 0.
    """
    m = np.asarray(mask) != 0
    if m.ndim != 2:
        raise ShapeError(f"mask must be 2-D, got shape {m.shape}")
    padded = np.pad(m, 1)
    dist = ndimage.distance_transform_edt(padded)
    return np.ascontiguousarray(dist[1:-1, 1:-1])


def _deepest_unclicked(region: np.ndarray, prior_clicks) -> tuple[int, int] | None:
    """Pixel of ``region`` farthest from its boundary, skipping pixels
    already clicked; ties go to the smallest (y, x)."""
    dist = distance_transform(region)
    for c in prior_clicks:
        if 0 <= c.y < dist.shape[0] and 0 <= c.x < dist.shape[1]:
            dist[c.y, c.x] = -1.0
    flat = int(np.argmax(dist))         # first occurrence = smallest (y, x)
    if dist.flat[flat] <= 0.0:
        return None                     # region empty or fully clicked
    y, x = divmod(flat, dist.shape[1])
    return int(y), int(x)


def _next_ordinal(prior_clicks) -> int:
    return max((c.ordinal for c in prior_clicks), default=0) + 1


def next_click(pred: np.ndarray, gt: np.ndarray, prior_clicks=()) -> Click | None:
    """Simulated user correction against the current prediction.

    Picks the larger of the two error regions (missing foreground vs
    spurious foreground; the miss wins ties), then the pixel deepest
    inside it.  Returns None once ``pred`` equals ``gt``.
    """
    pred = np.asarray(pred) != 0
    gt = np.asarray(gt) != 0
    if pred.shape != gt.shape:
        raise ShapeError(f"pred {pred.shape} vs gt {gt.shape}")
    fn = gt & ~pred
    fp = pred & ~gt
    if not fn.any() and not fp.any():
        return None
    first, second = ((fn, POSITIVE), (fp, NEGATIVE))
    if fp.sum() > fn.sum():
        first, second = second, first
    for region, kind in (first, second):
        spot = _deepest_unclicked(region, prior_clicks)
        if spot is not None:
            y, x = spot
            return Click(x=x, y=y, kind=kind, ordinal=_next_ordinal(prior_clicks))
    return None


def _sample_pixels(rng, candidates: np.ndarray, count: int, w: int) -> list[tuple[int, int]]:
    flats = np.flatnonzero(candidates)
    if flats.size == 0 or count == 0:
        return []
    take = min(count, flats.size)
    chosen = rng.choice(flats, size=take, replace=False)
    return [divmod(int(f), w) for f in chosen]


def _eroded(mask: np.ndarray, margin: int) -> np.ndarray:
    """Mask shrunk away from its boundary; falls back to the full mask
    when the margin would empty it."""
    inner = distance_transform(mask) > margin
    return inner if inner.any() else (np.asarray(mask) != 0)


def sample_training_clicks(
    gt: np.ndarray,
    current_pred: np.ndarray | None = None,
    round: int = 1,
    rng_seed: int = 0,
    prior_clicks: list[Click] | None = None,
    pos_count_range: tuple[int, int] = (1, 4),
    neg_count_range: tuple[int, int] = (0, 3),
    margin: int = 5,
    max_clicks: int = MAX_CLICKS,
) -> list[Click]:
    """Click list for one training round.

    Round 1 draws random positives inside the object and negatives in the
    background, both kept ``margin`` pixels away from the object boundary
    (initial counts are drawn from the configured ranges; the reference
    protocol leaves them open).  Later rounds append one simulated
    correction against ``current_pred`` thresholded at 0.5, falling back
    to a fresh interior positive when there is nothing to correct.  The
    list never grows beyond ``max_clicks``.
    """
    gt = np.asarray(gt) != 0
    if gt.ndim != 2:
        raise ShapeError(f"gt must be 2-D, got shape {gt.shape}")
    if not gt.any():
        raise ValidationError("ground-truth mask is empty")
    if round < 1:
        raise ValidationError(f"round must be >= 1, got {round}")
    h, w = gt.shape
    rng = np.random.default_rng(seed_key(rng_seed, round))

    if round == 1:
        n_pos = int(rng.integers(pos_count_range[0], pos_count_range[1] + 1))
        n_pos = max(1, n_pos)           # an empty first round teaches nothing
        n_neg = int(rng.integers(neg_count_range[0], neg_count_range[1] + 1))
        clicks: list[Click] = []
        for y, x in _sample_pixels(rng, _eroded(gt, margin), n_pos, w):
            clicks.append(Click(x=x, y=y, kind=POSITIVE, ordinal=len(clicks) + 1))
        background = ~gt
        if background.any():
            for y, x in _sample_pixels(rng, _eroded(background, margin), n_neg, w):
                clicks.append(Click(x=x, y=y, kind=NEGATIVE, ordinal=len(clicks) + 1))
        return clicks[:max_clicks]

    prior = list(prior_clicks) if prior_clicks else []
    if len(prior) >= max_clicks:
        return prior
    pred_mask = np.zeros_like(gt) if current_pred is None else np.asarray(current_pred) >= 0.5
    click = next_click(pred_mask, gt, prior)
    if click is None:
        # Nothing left to correct: reinforce with a random interior positive.
        taken = np.zeros_like(gt)
        for c in prior:
            taken[c.y, c.x] = True
        candidates = _eroded(gt, margin) & ~taken
        if not candidates.any():
            candidates = gt & ~taken
        spots = _sample_pixels(rng, candidates, 1, w)
        if not spots:
            return prior
        y, x = spots[0]
        click = Click(x=x, y=y, kind=POSITIVE, ordinal=_next_ordinal(prior))
    return prior + [click]
