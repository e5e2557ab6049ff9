"""Stable integer keys for named random streams.

numpy's SeedSequence accepts only unsigned integers, but call sites want
to label streams with readable parts like ("sample", epoch, step).  This
flattens such mixed tuples into integers deterministically (strings via
CRC-32), so derived streams are reproducible across runs and platforms.
"""

from __future__ import annotations

import zlib

from .errors import ConfigError


def seed_key(*parts) -> tuple[int, ...]:
    out: list[int] = []
    for part in parts:
        if isinstance(part, (tuple, list)):
            out.extend(seed_key(*part))
        elif isinstance(part, str):
            out.append(zlib.crc32(part.encode("utf-8")))
        elif isinstance(part, bool):
            raise ConfigError("booleans are ambiguous seed parts")
        elif isinstance(part, int):
            out.append(part & 0xFFFFFFFFFFFFFFFF)
        else:
            try:
                i = int(part)
            except (TypeError, ValueError):
                raise ConfigError(f"cannot derive a seed from {part!r}") from None
            if i != part:
                raise ConfigError(f"cannot derive a seed from {part!r}")
            out.append(i & 0xFFFFFFFFFFFFFFFF)
    return tuple(out)
