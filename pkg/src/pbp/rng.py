"""Pinned 64-bit PRNG (splitmix64) with labeled substreams.

Scene layout, target switching, and obstacle activation each get their own
stream so adding draws to one purpose never perturbs another. The algorithm
is fixed (not Python's Mersenne Twister) so seeds are portable across
implementations.
"""
from __future__ import annotations

_MASK = (1 << 64) - 1


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK
    return z ^ (z >> 31)


def _fnv1a(label: str) -> int:
    h = 0xCBF29CE484222325
    for b in label.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & _MASK
    return h


def substream_seed(seed: int, label: str) -> int:
    """Derive a stream seed for one purpose from a trial seed."""
    return _mix((seed & _MASK) ^ _fnv1a(label))


class SplitMix64:
    """Deterministic generator: next_u64 is the splitmix64 sequence."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        return _mix(self._state)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randrange(self, n: int) -> int:
        """Integer in [0, n) via multiply-shift (no modulo bias for n << 2^64)."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return (self.next_u64() * n) >> 64

    def choice(self, items):
        return items[self.randrange(len(items))]
