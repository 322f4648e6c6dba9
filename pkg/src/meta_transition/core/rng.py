"""Seeded pseudo-randomness with named, independent sub-streams."""

import zlib
from typing import Tuple

import numpy as np


def _stream_key(name: str) -> int:
    # crc32 is stable across processes, unlike hash().
    return zlib.crc32(name.encode("utf-8"))


class SeededRng:
    """A PCG64 generator identified by a seed and a path of stream names.

    ``SeededRng(7)`` and ``SeededRng(7)`` produce identical draws, also across
    process restarts. ``spawn("init")`` derives an independent child stream,
    so consumers drawing from different streams never shift each other's
    sequences. Instances are single-owner.
    """

    def __init__(self, seed: int, path: Tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = tuple(path)
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def spawn(self, name: str) -> "SeededRng":
        """Child stream keyed by ``name``; independent of this stream's state."""
        return SeededRng(self.seed, self.path + (_stream_key(name),))

    def uniform(self, low: float, high: float, size) -> np.ndarray:
        return self.generator.uniform(low, high, size=size)

    def random(self, size) -> np.ndarray:
        return self.generator.random(size)

    def normal(self, loc, scale, size) -> np.ndarray:
        return self.generator.normal(loc, scale, size=size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def choice(self, values, size: int, replace: bool = False) -> np.ndarray:
        return self.generator.choice(values, size=size, replace=replace)

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, path={self.path})"
