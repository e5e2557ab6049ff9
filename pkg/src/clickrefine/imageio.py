"""PNG codecs for masks and probability maps.

Masks travel as 8-bit grayscale with values {0, 255}; probability maps as
16-bit grayscale with value = round(p * 65535).  Both round-trip
bit-exactly: decode(encode(x)) == x at the stored quantization.
"""

from __future__ import annotations

from io import BytesIO
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ValidationError

PROB_SCALE = 65535


def prob_to_png_bytes(prob: np.ndarray) -> bytes:
    prob = np.asarray(prob)
    if prob.ndim != 2:
        raise ValidationError(f"probability map must be 2-D, got {prob.shape}")
    if not np.all(np.isfinite(prob)) or prob.min() < 0 or prob.max() > 1:
        raise ValidationError("probability map values must be finite and in [0, 1]")
    q = np.round(prob.astype(np.float64) * PROB_SCALE).astype(np.uint16)
    buf = BytesIO()
    Image.fromarray(q).save(buf, format="PNG")
    return buf.getvalue()


def prob_from_png_bytes(data: bytes) -> np.ndarray:
    img = Image.open(BytesIO(data))
    arr = np.array(img)
    if arr.dtype != np.uint16:
        raise ValidationError(f"expected 16-bit grayscale PNG, got dtype {arr.dtype}")
    return arr.astype(np.float64) / PROB_SCALE


def mask_to_png_bytes(mask: np.ndarray) -> bytes:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValidationError(f"mask must be 2-D, got {mask.shape}")
    q = np.where(mask != 0, 255, 0).astype(np.uint8)
    buf = BytesIO()
    Image.fromarray(q, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def mask_from_png_bytes(data: bytes) -> np.ndarray:
    img = Image.open(BytesIO(data))
    if img.mode != "L":
        img = img.convert("L")
    return np.array(img) >= 128


def save_prob_png(prob: np.ndarray, path: str | Path) -> None:
    Path(path).write_bytes(prob_to_png_bytes(prob))


def load_prob_png(path: str | Path) -> np.ndarray:
    return prob_from_png_bytes(Path(path).read_bytes())


def image_rgb_from_bytes(data: bytes) -> np.ndarray:
    """Encoded image bytes -> float32 (3, H, W) in [0, 1]."""
    try:
        img = Image.open(BytesIO(data))
        img.load()
    except Exception as exc:
        raise ValidationError(f"cannot decode image: {exc}") from exc
    arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    return np.ascontiguousarray(arr.transpose(2, 0, 1))


def load_image_rgb(path: str | Path) -> np.ndarray:
    """Image file -> float32 (3, H, W) in [0, 1]."""
    return image_rgb_from_bytes(Path(path).read_bytes())


def load_mask_png(path: str | Path) -> np.ndarray:
    return mask_from_png_bytes(Path(path).read_bytes())


def save_image_rgb(image: np.ndarray, path: str | Path) -> None:
    """Float (3, H, W) in [0, 1] -> 8-bit RGB PNG."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[0] != 3:
        raise ValidationError(f"image must be (3, H, W), got {image.shape}")
    if not np.all(np.isfinite(image)) or image.min() < 0 or image.max() > 1:
        raise ValidationError("image values must be finite and in [0, 1]")
    q = np.round(image.astype(np.float64) * 255).astype(np.uint8)
    Image.fromarray(q.transpose(1, 2, 0), mode="RGB").save(path, format="PNG")


def save_mask_png(mask: np.ndarray, path: str | Path) -> None:
    Path(path).write_bytes(mask_to_png_bytes(mask))
