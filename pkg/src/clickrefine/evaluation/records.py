"""Benchmark instance records and manifest loading.

A manifest is a JSON array of ``{"image": ..., "mask": ..., "instance_id":
...}`` objects.  Relative paths resolve against the manifest's own
directory, masks are 8-bit PNGs binarized at 128, and every referenced
file is checked up front so a bad manifest fails loudly before any
evaluation work starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import ValidationError
from ..imageio import load_image_rgb, load_mask_png, save_image_rgb, save_mask_png


@dataclass(frozen=True)
class InstanceRecord:
    """One thing to segment: an image, its binary target, and an id."""

    image_path: str
    mask_path: str
    instance_id: str
    source: str = ""

    def load_image(self) -> np.ndarray:
        return load_image_rgb(self.image_path)

    def load_mask(self) -> np.ndarray:
        mask = load_mask_png(self.mask_path)
        if not mask.any():
            raise ValidationError(f"empty instance: {self.mask_path}")
        return mask


def _check_record(entry: object, base: Path, index: int, errors: list[str]) -> InstanceRecord | None:
    where = f"record {index}"
    if not isinstance(entry, dict):
        errors.append(f"{where}: expected an object, got {type(entry).__name__}")
        return None
    missing = [k for k in ("image", "mask", "instance_id") if k not in entry]
    if missing:
        errors.append(f"{where}: missing keys {missing}")
        return None
    unknown = sorted(set(entry) - {"image", "mask", "instance_id", "source"})
    if unknown:
        errors.append(f"{where}: unknown keys {unknown}")
        return None
    image_path = base / str(entry["image"])
    mask_path = base / str(entry["mask"])
    record = InstanceRecord(image_path=str(image_path), mask_path=str(mask_path),
                            instance_id=str(entry["instance_id"]),
                            source=str(entry.get("source", "")))
    if not image_path.is_file():
        errors.append(f"{where}: image file missing: {image_path}")
        return None
    if not mask_path.is_file():
        errors.append(f"{where}: mask file missing: {mask_path}")
        return None
    try:
        with Image.open(image_path) as img:
            img.verify()
    except (UnidentifiedImageError, OSError) as exc:
        errors.append(f"{where}: unreadable image {image_path}: {exc}")
        return None
    try:
        mask = load_mask_png(mask_path)
    except (UnidentifiedImageError, OSError, ValidationError) as exc:
        errors.append(f"{where}: unreadable mask {mask_path}: {exc}")
        return None
    if not mask.any():
        errors.append(f"{where}: empty instance: {mask_path}")
        return None
    return record


def load_manifest(path: str | Path) -> list[InstanceRecord]:
    """Parse and fully validate a benchmark manifest.

    Every problem is reported, not just the first: the raised error
    message carries one line per offending record.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"manifest not found: {path}")
    try:
        entries = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed manifest {path}: {exc}") from exc
    if not isinstance(entries, list):
        raise ValidationError(f"manifest {path} must be a JSON array, got "
                              f"{type(entries).__name__}")
    errors: list[str] = []
    records = []
    for i, entry in enumerate(entries):
        record = _check_record(entry, path.parent, i, errors)
        if record is not None:
            records.append(record)
    if errors:
        raise ValidationError(f"manifest {path} has {len(errors)} bad record(s):\n"
                              + "\n".join(errors))
    return records


def write_manifest(records: list[InstanceRecord], path: str | Path) -> Path:
    """Write records as a manifest JSON; paths are stored relative to it
    when possible so the directory stays relocatable."""
    path = Path(path)
    base = path.parent.resolve()

    def _portable(p: str) -> str:
        try:
            return Path(p).resolve().relative_to(base).as_posix()
        except ValueError:
            return str(Path(p).resolve())

    entries = []
    for r in records:
        entry = {"image": _portable(r.image_path), "mask": _portable(r.mask_path),
                 "instance_id": r.instance_id}
        if r.source:
            entry["source"] = r.source
        entries.append(entry)
    path.write_text(json.dumps(entries, indent=2, sort_keys=True) + "\n")
    return path


def write_synthetic_manifest(out_dir: str | Path, count: int, size: int,
                             seed: int) -> Path:
    """Materialize a reproducible benchmark of procedural scenes.

    Writes ``images/`` and ``masks/`` PNGs plus ``manifest.json`` under
    ``out_dir`` and returns the manifest path.
    """
    from ..training.synth import synthetic_dataset

    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    records = []
    for i, (image, gt) in enumerate(synthetic_dataset(count, size, seed)):
        image_path = out_dir / "images" / f"{i:04d}.png"
        mask_path = out_dir / "masks" / f"{i:04d}.png"
        save_image_rgb(image, image_path)
        save_mask_png(gt, mask_path)
        records.append(InstanceRecord(image_path=str(image_path),
                                      mask_path=str(mask_path),
                                      instance_id=f"synthetic-{i:04d}",
                                      source="synthetic"))
    return write_manifest(records, out_dir / "manifest.json")
