"""Reproducible, independent random streams.

Every consumer asks for a generator by a path of keys, e.g.
``stream(seed, "channel", 3)``.  Paths are hashed into a
:class:`numpy.random.SeedSequence` spawn key and fed to a Philox
(counter-based) bit generator, so streams never overlap and the
numbers drawn on one path do not depend on how much was drawn on another.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["stream", "spawn_key"]


def _key_part(part) -> int:
    if isinstance(part, (bool, np.bool_)):
        raise TypeError("stream keys must be str or int")
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("integer stream keys must be non-negative")
        return int(part)
    if isinstance(part, str):
        # offset keeps string keys disjoint from small integer keys
        return (1 << 32) + zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"unsupported stream key {part!r}")


def spawn_key(*path) -> tuple[int, ...]:
    return tuple(_key_part(p) for p in path)


def stream(seed: int, *path) -> np.random.Generator:
    """Return a fresh generator for ``(seed, *path)``.

    Calling twice with the same arguments yields bit-identical draws.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key(*path))
    return np.random.Generator(np.random.Philox(ss))
