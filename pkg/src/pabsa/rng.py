"""Deterministic random generator used everywhere randomness is needed.

SplitMix64 is small, fast and trivially portable, so shuffles, splits and
augmentation draws can be reproduced bit-for-bit by any other
implementation that follows the same draw protocol.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream seeded with an arbitrary Python int."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return (z ^ (z >> 31)) & _MASK64

    def below(self, n: int) -> int:
        """Uniform int in [0, n). Modulo draw; bias is negligible for the
        desk-scale n used here and keeps the sequence easy to replicate."""
        if n <= 0:
            raise ValueError(f"below() needs n >= 1, got {n}")
        return self.next_u64() % n

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * 2.0 ** -53


def shuffled(items, rng: SplitMix64) -> list:
    """Fisher-Yates shuffle (backward variant), driven by ``rng``.

    Returns a new list; the input is not touched.
    """
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
