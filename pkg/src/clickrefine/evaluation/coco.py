"""COCO-annotation import: convert RLE / polygon segmentations to mask PNGs.

Produces the manifest layout that ``load_manifest`` consumes: one binary
mask PNG per annotation plus a ``manifest.json`` pointing at the source
images.  Run-length counts follow the COCO convention — column-major
scan order, runs alternating background first.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from ..errors import ValidationError
from ..imageio import save_mask_png
from .records import InstanceRecord, write_manifest

log = logging.getLogger(__name__)


def decode_rle_counts(counts: list[int], h: int, w: int) -> np.ndarray:
    """Alternating background/foreground run lengths -> (h, w) bool mask."""
    counts = [int(c) for c in counts]
    if any(c < 0 for c in counts):
        raise ValidationError(f"negative run length in {counts}")
    total = sum(counts)
    if total != h * w:
        raise ValidationError(f"run lengths sum to {total}, expected {h * w}")
    values = np.zeros(len(counts), dtype=bool)
    values[1::2] = True
    flat = np.repeat(values, counts)
    # column-major: consecutive run pixels walk down a column
    return np.ascontiguousarray(flat.reshape((h, w), order="F"))


def decode_rle_string(data: str, h: int, w: int) -> np.ndarray:
    """Compressed run-length string -> (h, w) bool mask.

    Each count is a little-endian base-32 varint stored in printable
    characters (offset 48); bit 0x20 continues the value, bit 0x10 of the
    final chunk is the sign.  From the third count on, values are deltas
    against the count two places back.
    """
    counts: list[int] = []
    p = 0
    while p < len(data):
        x = 0
        k = 0
        while True:
            if p >= len(data):
                raise ValidationError("truncated run-length string")
            c = ord(data[p]) - 48
            if c < 0 or c > 63:
                raise ValidationError(f"bad run-length character {data[p]!r}")
            p += 1
            x |= (c & 0x1F) << (5 * k)
            k += 1
            if not c & 0x20:
                if c & 0x10:
                    x |= -1 << (5 * k)
                break
        if len(counts) > 2:
            x += counts[-2]
        counts.append(x)
    return decode_rle_counts(counts, h, w)


def polygons_to_mask(polygons: list[list[float]], h: int, w: int) -> np.ndarray:
    """Rasterize a union of polygons, each a flat [x0, y0, x1, y1, ...]."""
    canvas = Image.new("1", (w, h), 0)
    draw = ImageDraw.Draw(canvas)
    for poly in polygons:
        if len(poly) < 6 or len(poly) % 2:
            raise ValidationError(f"degenerate polygon with {len(poly)} coordinates")
        points = [(float(x), float(y)) for x, y in zip(poly[0::2], poly[1::2])]
        draw.polygon(points, outline=1, fill=1)
    return np.array(canvas, dtype=bool)


def segmentation_to_mask(segmentation: object, h: int, w: int) -> np.ndarray:
    """Dispatch on the annotation's segmentation payload shape."""
    if isinstance(segmentation, dict):
        size = segmentation.get("size")
        if size is not None and tuple(size) != (h, w):
            raise ValidationError(f"segmentation size {size} != image size {(h, w)}")
        counts = segmentation.get("counts")
        if isinstance(counts, str):
            return decode_rle_string(counts, h, w)
        if isinstance(counts, list):
            return decode_rle_counts(counts, h, w)
        raise ValidationError(f"unsupported counts type {type(counts).__name__}")
    if isinstance(segmentation, list):
        return polygons_to_mask(segmentation, h, w)
    raise ValidationError(f"unsupported segmentation type {type(segmentation).__name__}")


def import_coco(annotations_path: str | Path, images_dir: str | Path,
                out_dir: str | Path) -> Path:
    """COCO annotation JSON -> mask PNGs + manifest under ``out_dir``.

    Annotations whose mask rasterizes to empty are skipped with a log
    line rather than poisoning the manifest.  Returns the manifest path.
    """
    annotations_path = Path(annotations_path)
    images_dir = Path(images_dir)
    out_dir = Path(out_dir)
    try:
        doc = json.loads(annotations_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read annotations {annotations_path}: {exc}") from exc
    if not isinstance(doc, dict) or "images" not in doc or "annotations" not in doc:
        raise ValidationError("annotation JSON needs 'images' and 'annotations' keys")

    images_by_id = {}
    for img in doc["images"]:
        try:
            images_by_id[img["id"]] = (img["file_name"], int(img["height"]), int(img["width"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"bad image entry {img!r}: {exc}") from exc

    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    records = []
    skipped = 0
    errors: list[str] = []
    for ann in sorted(doc["annotations"], key=lambda a: a.get("id", 0)):
        ann_id = ann.get("id")
        where = f"annotation {ann_id}"
        if ann.get("image_id") not in images_by_id:
            errors.append(f"{where}: unknown image_id {ann.get('image_id')!r}")
            continue
        file_name, h, w = images_by_id[ann["image_id"]]
        image_path = images_dir / file_name
        if not image_path.is_file():
            errors.append(f"{where}: image file missing: {image_path}")
            continue
        try:
            mask = segmentation_to_mask(ann.get("segmentation"), h, w)
        except ValidationError as exc:
            errors.append(f"{where}: {exc}")
            continue
        if not mask.any():
            skipped += 1
            log.warning("%s: empty mask, skipped", where)
            continue
        mask_path = out_dir / "masks" / f"{ann_id}.png"
        save_mask_png(mask, mask_path)
        records.append(InstanceRecord(image_path=str(image_path),
                                      mask_path=str(mask_path),
                                      instance_id=str(ann_id),
                                      source=annotations_path.stem))
    if errors:
        raise ValidationError(f"{annotations_path} has {len(errors)} bad annotation(s):\n"
                              + "\n".join(errors))
    if skipped:
        log.warning("skipped %d empty annotation(s)", skipped)
    return write_manifest(records, out_dir / "manifest.json")
