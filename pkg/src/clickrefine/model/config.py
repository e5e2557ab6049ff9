"""Network hyperparameters and their serialized form."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from ..errors import ConfigError


def _default_early_indices(depth: int) -> tuple[int, int]:
    # Taps at a third and two thirds of the stack; blocks are 0-indexed.
    return (max(0, depth // 3), max(1, (2 * depth) // 3))


@dataclass(frozen=True)
class ModelConfig:
    """Shape-defining knobs for the segmentation network.

    The reference preset is patch 16 / 768-dim / 12 blocks at 448 input;
    the defaults here are a desk-scale stand-in with identical wiring.
    """

    patch: int = 8
    embed_dim: int = 32
    depth: int = 4
    heads: int = 4
    early_block_indices: tuple[int, int] | None = None
    fpn_dims: tuple[int, int, int, int] = (16, 24, 32, 48)
    hq_out_dim: int = 16
    decoder_layers: int = 2
    token_count: int = 1
    dyn_kernel: int = 3
    input_resolution: int = 64

    def __post_init__(self):
        if self.early_block_indices is None:
            object.__setattr__(self, "early_block_indices", _default_early_indices(self.depth))
        object.__setattr__(self, "early_block_indices", tuple(self.early_block_indices))
        object.__setattr__(self, "fpn_dims", tuple(self.fpn_dims))
        if self.embed_dim % self.heads:
            raise ConfigError(f"embed_dim {self.embed_dim} not divisible by {self.heads} heads")
        if self.embed_dim % 4:
            # quarter-width pyramid branch and the 4:1 channel squeeze
            raise ConfigError(f"embed_dim must be divisible by 4, got {self.embed_dim}")
        if self.patch < 1 or self.patch & (self.patch - 1):
            raise ConfigError(f"patch size must be a power of two, got {self.patch}")
        if self.input_resolution % self.patch:
            raise ConfigError(
                f"input resolution {self.input_resolution} not divisible by patch {self.patch}"
            )
        grid = self.input_resolution // self.patch
        if grid < 2 or grid % 2:
            # the half-resolution pyramid branch pools the token grid by 2
            raise ConfigError(f"token grid side must be even and >= 2, got {grid}")
        a, b = self.early_block_indices
        if not (0 <= a <= b < self.depth):
            raise ConfigError(f"early block indices {self.early_block_indices} out of range")
        if len(self.fpn_dims) != 4:
            raise ConfigError("fpn_dims must list exactly four branch widths")
        if self.decoder_layers < 1:
            raise ConfigError("decoder needs at least one layer")
        if self.token_count < 1:
            raise ConfigError("need at least one query token")
        if self.dyn_kernel % 2 == 0:
            raise ConfigError("dynamic kernel size must be odd")

    @property
    def grid(self) -> int:
        """Token grid side length."""
        return self.input_resolution // self.patch

    @property
    def hq_grid(self) -> int:
        """Side length of the fine feature plane (4x the token grid)."""
        return self.grid * 4

    @property
    def mlp_dim(self) -> int:
        return self.embed_dim * 4

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config JSON: {exc}") from None
        known = set(cls.__dataclass_fields__)
        extra = set(raw) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        return cls(**raw)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "ModelConfig":
        return cls.from_json(Path(path).read_text())
