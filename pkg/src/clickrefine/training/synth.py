"""Seeded synthetic scenes: star-convex blobs on gradient backgrounds.

Everything here is a pure function of its seed, so datasets and
augmentation streams are bit-reproducible across runs and machines.
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from ..seeding import seed_key


def synthetic_scene(size: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """One (image, mask) pair: a lobed blob against a shaded backdrop.

    The blob's boundary is a smooth radial function of angle (two sine
    harmonics), so masks are connected, irregular, and never empty.
    """
    rng = np.random.default_rng(seed_key(seed))
    cy, cx = rng.uniform(0.35, 0.65, 2) * size
    base = rng.uniform(0.14, 0.32) * size
    lobes = int(rng.integers(2, 6))
    amp1, amp2 = rng.uniform(0.05, 0.30), rng.uniform(0.0, 0.12)
    ph1, ph2 = rng.uniform(0, 2 * np.pi, 2)

    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    ang = np.arctan2(ys - cy, xs - cx)
    boundary = base * (1.0 + amp1 * np.sin(lobes * ang + ph1)
                       + amp2 * np.sin(2 * lobes * ang + ph2))
    dist = np.hypot(ys - cy, xs - cx)
    gt = dist <= boundary

    # Backdrop: per-channel linear shading plus mild noise; the object
    # region gets its own color shift so it is learnable from RGB alone.
    gx, gy = rng.uniform(-0.3, 0.3, 2)
    ramp = (gx * xs + gy * ys) / size
    image = np.empty((3, size, size), np.float64)
    for c in range(3):
        image[c] = rng.uniform(0.25, 0.75) + ramp * rng.uniform(0.5, 1.5)
    shift = rng.uniform(-0.35, 0.35, 3)
    shift += np.where(np.abs(shift) < 0.15, np.sign(shift + 1e-9) * 0.15, 0.0)
    image += shift[:, None, None] * gt[None]
    image += rng.normal(0.0, 0.02, image.shape)
    return np.clip(image, 0.0, 1.0).astype(np.float32), gt


def synthetic_dataset(count: int, size: int, seed: int
                      ) -> list[tuple[np.ndarray, np.ndarray]]:
    """``count`` independent scenes drawn from one master seed."""
    if count < 1:
        raise ValidationError("dataset needs at least one scene")
    return [synthetic_scene(size, (seed, "scene", i)) for i in range(count)]


def augment(image: np.ndarray, gt: np.ndarray, seed
            ) -> tuple[np.ndarray, np.ndarray]:
    """Seeded flips, quarter-turns, and per-channel affine color jitter."""
    rng = np.random.default_rng(seed_key(seed))
    image = np.asarray(image, np.float32)
    gt = np.asarray(gt, bool)
    if rng.random() < 0.5:
        image, gt = image[:, :, ::-1], gt[:, ::-1]
    if rng.random() < 0.5:
        image, gt = image[:, ::-1, :], gt[::-1, :]
    turns = int(rng.integers(0, 4))
    if turns:
        image = np.rot90(image, turns, axes=(1, 2))
        gt = np.rot90(gt, turns)
    scale = rng.uniform(0.8, 1.2, 3).astype(np.float32)
    offset = rng.uniform(-0.1, 0.1, 3).astype(np.float32)
    image = image * scale[:, None, None] + offset[:, None, None]
    return np.clip(image, 0.0, 1.0).copy(), gt.copy()
