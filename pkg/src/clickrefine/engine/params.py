"""Named parameter registry with per-entry freeze flags and file round trip.

On disk a parameter set is a JSON manifest (name, shape, dtype, byte
offset, trainable) next to a little-endian float32 blob.  The round trip
is bit-exact for float32 data.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError, ShapeError
from .core import Tensor

MANIFEST_NAME = "manifest.json"
BLOB_NAME = "weights.bin"


class ParamSet:
    """Ordered map of dotted names to tensors, each frozen or trainable."""

    def __init__(self):
        self._entries: dict[str, Tensor] = {}
        self._trainable: dict[str, bool] = {}

    def add(self, name: str, value: np.ndarray, trainable: bool) -> Tensor:
        if name in self._entries:
            raise ConfigError(f"duplicate parameter name {name!r}")
        t = Tensor(np.asarray(value), requires_grad=trainable)
        self._entries[name] = t
        self._trainable[name] = trainable
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._entries[name]

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def names(self) -> list[str]:
        return list(self._entries)

    def is_trainable(self, name: str) -> bool:
        return self._trainable[name]

    def items(self):
        return self._entries.items()

    def trainable_items(self):
        return [(n, t) for n, t in self._entries.items() if self._trainable[n]]

    def frozen_items(self):
        return [(n, t) for n, t in self._entries.items() if not self._trainable[n]]

    def num_entries(self, trainable: bool | None = None) -> int:
        """Total scalar count, optionally restricted by flag."""
        total = 0
        for n, t in self._entries.items():
            if trainable is None or self._trainable[n] == trainable:
                total += t.data.size
        return total

    def zero_grads(self) -> None:
        for _, t in self.trainable_items():
            t.grad = None

    def set_data(self, name: str, value: np.ndarray) -> None:
        """Overwrite a trainable entry in place (optimizer use only)."""
        if not self._trainable[name]:
            raise ConfigError(f"parameter {name!r} is frozen")
        t = self._entries[name]
        if t.data.shape != value.shape:
            raise ShapeError(f"shape mismatch writing {name!r}")
        t.data = value.astype(t.data.dtype, copy=False)

    def checksum(self, trainable: bool | None = None) -> str:
        """SHA-256 over the raw bytes of the selected entries, in name order."""
        h = hashlib.sha256()
        for name in sorted(self._entries):
            if trainable is not None and self._trainable[name] != trainable:
                continue
            h.update(name.encode())
            h.update(np.ascontiguousarray(self._entries[name].data).tobytes())
        return h.hexdigest()

    def astype(self, dtype) -> "ParamSet":
        """Copy with every entry cast to ``dtype`` (float64 for oracles)."""
        out = ParamSet()
        for name, t in self._entries.items():
            out.add(name, t.data.astype(dtype), self._trainable[name])
        return out

    # -- persistence -------------------------------------------------------

    def save(self, directory: str | Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        entries = []
        offset = 0
        chunks = []
        for name in self._entries:
            # astype returns a fresh C-order copy, and unlike
            # ascontiguousarray it keeps 0-d shapes intact.
            data = self._entries[name].data.astype("<f4")
            raw = data.tobytes()
            entries.append({
                "name": name,
                "shape": list(data.shape),
                "dtype": "f32",
                "offset": offset,
                "trainable": self._trainable[name],
            })
            chunks.append(raw)
            offset += len(raw)
        (directory / BLOB_NAME).write_bytes(b"".join(chunks))
        manifest = {"format": "clickrefine-weights-v1", "blob": BLOB_NAME, "entries": entries}
        (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=1))

    @classmethod
    def load(cls, directory: str | Path) -> "ParamSet":
        directory = Path(directory)
        manifest = json.loads((directory / MANIFEST_NAME).read_text())
        blob = (directory / Path(manifest["blob"]).name).read_bytes()
        ps = cls()
        for e in manifest["entries"]:
            if e["dtype"] != "f32":
                raise ConfigError(f"unsupported dtype {e['dtype']!r} for {e['name']!r}")
            shape = tuple(e["shape"])
            count = int(np.prod(shape)) if shape else 1
            start = e["offset"]
            arr = np.frombuffer(blob, dtype="<f4", count=count, offset=start).reshape(shape)
            ps.add(e["name"], arr.copy(), bool(e["trainable"]))
        return ps
