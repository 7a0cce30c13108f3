"""Seeded portable random number generation.

Everything random in this package flows through :class:`PortableRng`, a
SplitMix64 generator (Vigna's reference algorithm, the seeder used by the
xoshiro family; seed 0 produces 0xE220A8397B1DCDAF). The derived draws are
all specified exactly so that golden values survive re-implementation in
another language:

- uniform doubles: ``(next_u64() >> 11) * 2**-53`` in [0, 1)
- bounded ints: rejection below the largest multiple of n in 2**64, then mod
- gaussians: basic Box-Muller on two uniforms, second value cached
- shuffles: Fisher-Yates from the last index down
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO53 = float(1 << 53)


class PortableRng:
    """SplitMix64 stream with the derived draws used across the package."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        self._spare_gaussian: float | None = None

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform double in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / _TWO53

    def next_below(self, n: int) -> int:
        """Uniform int in [0, n), unbiased via rejection sampling."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def next_gaussian(self) -> float:
        """Standard normal via Box-Muller; generates pairs, caches the second."""
        if self._spare_gaussian is not None:
            value = self._spare_gaussian
            self._spare_gaussian = None
            return value
        # 1 - u keeps the argument of log strictly positive.
        u1 = 1.0 - self.next_float()
        u2 = self.next_float()
        radius = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        self._spare_gaussian = radius * math.sin(theta)
        return radius * math.cos(theta)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_indices(self, population: int, k: int) -> list[int]:
        """k distinct indices from range(population), without replacement.

        Partial Fisher-Yates over the index array; the result is returned in
        ascending order so callers get a canonical selection.
        """
        if k < 0 or k > population:
            raise ValueError("sample size out of range")
        indices = list(range(population))
        for i in range(k):
            j = i + self.next_below(population - i)
            indices[i], indices[j] = indices[j], indices[i]
        return sorted(indices[:k])
