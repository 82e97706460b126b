"""Deterministic, cross-platform pseudorandomness.

Everything stochastic in this package is derived from a single 64-bit
mixing function (the splitmix64 finalizer).  The same arithmetic is
implemented in the compiled kernels, so a seed produces the same stream
regardless of backend or platform.
"""

from __future__ import annotations

import math

M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """One splitmix64 step: add the golden-ratio increment, then finalize."""
    z = (z + _GOLDEN) & M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


def hash_words(seed: int, words) -> int:
    """Keyed hash of a sequence of 64-bit words (two's complement for negatives)."""
    h = seed & M64
    for w in words:
        h = mix64(h ^ (w & M64))
    return h


def seed_schedule(master_seed: int, stream_label: str, index: int) -> int:
    """Collision-resistant child seed for (label, index) under a master seed."""
    h = master_seed & M64
    for b in stream_label.encode("utf8"):
        h = mix64(h ^ b)
    return mix64(h ^ (index & M64))


def label_state(master_seed: int, stream_label: str) -> int:
    """Label-only part of seed_schedule; child i is mix64(state ^ i)."""
    h = master_seed & M64
    for b in stream_label.encode("utf8"):
        h = mix64(h ^ b)
    return h


def u53(word: int) -> float:
    """Map a 64-bit word to a uniform double strictly inside (0, 1)."""
    return ((word >> 11) + 0.5) * (2.0 ** -53)


class Stream:
    """splitmix64 counter stream; the compiled kernels step it identically."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & M64

    def next_word(self) -> int:
        self.state = (self.state + _GOLDEN) & M64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return u53(self.next_word())

    def exponential(self, rate: float) -> float:
        return -math.log(self.uniform()) / rate

    def randint_below(self, n: int) -> int:
        """Uniform integer in [0, n) from one uniform draw."""
        k = int(self.uniform() * n)
        return n - 1 if k >= n else k
