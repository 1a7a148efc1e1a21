"""Counter-based splitmix64 streams.

Draw ``j`` of sample ``i`` depends only on ``(seed, i, j)``, so any partition
of the sample range over threads reproduces the same sequences.  The numba
kernel carries a bit-identical copy of these functions.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
SEED_SALT = 0x5851F42D4C957F2D


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_key(seed: int) -> int:
    return mix64((seed & MASK64) ^ SEED_SALT)


def sample_key(seed: int, index: int) -> int:
    return mix64(seed_key(seed) + index * GAMMA)


def draw(key: int, j: int) -> int:
    """``j``-th 64-bit word of the stream with ``key``."""
    return mix64(key + (j + 1) * GAMMA)


def bounded(x: int, m: int) -> int:
    """Map a 64-bit word to ``range(m)`` (``m < 2**32``) by multiply-shift."""
    return ((x >> 32) * m) >> 32


class Stream:
    """Sequential reader over one sample's counter-based stream."""

    def __init__(self, seed: int, index: int = 0):
        self.seed = seed
        self.index = index
        self.key = sample_key(seed, index)
        self.pos = 0

    def next_u64(self) -> int:
        x = draw(self.key, self.pos)
        self.pos += 1
        return x

    def below(self, m: int) -> int:
        return bounded(self.next_u64(), m)
