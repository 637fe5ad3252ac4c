"""Seedable random number generation with a frozen, documented algorithm.

Reproducibility of simulation output is part of this package's contract, so
we do not rely on the platform's default generator. The algorithm is fixed:

* State generator: xoshiro256** (Blackman & Vigna), seeded by expanding a
  64-bit seed through splitmix64.
* Uniform doubles: the top 53 bits of the next 64-bit output, scaled by
  2^-53, giving a value in [0, 1).
* Exponential(rate): inverse CDF, ``-log(1 - u) / rate``.
* Binomial(n, p): counting successes by geometric skips over the failure
  run lengths, applied to q = min(p, 1 - p) and reflected when p > 1/2.
  The number of uniforms consumed is data-dependent but a pure function of
  the stream, so replaying a seed replays the draws exactly.
* Sub-streams: trajectory i of an ensemble with master seed m uses the seed
  ``substream_seed(m, i)``, which is the (i+1)-th output of a splitmix64
  sequence started at m. Sub-streams are therefore as independent as
  distinct splitmix64 outputs.

The compiled kernels implement the same algorithms over C doubles and
64-bit integers; on one platform the two implementations produce identical
streams, which the engine-equivalence tests rely on.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_INV_2_53 = 2.0**-53


def _mix64(z: int) -> int:
    """splitmix64 output finalizer."""
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK64
    return z ^ (z >> 31)


def substream_seed(master_seed: int, index: int) -> int:
    """Seed for trajectory `index` of an ensemble keyed by `master_seed`."""
    if index < 0:
        raise ValueError("substream index must be non-negative")
    return _mix64((master_seed + _GAMMA * (index + 1)) & _MASK64)


class Rng:
    """xoshiro256** stream with the distribution helpers used by the engines."""

    __slots__ = ("_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int):
        s = seed & _MASK64
        words = []
        for _ in range(4):
            s = (s + _GAMMA) & _MASK64
            words.append(_mix64(s))
        if not any(words):  # xoshiro must not start at the all-zero state
            words[0] = 1
        self._s0, self._s1, self._s2, self._s3 = words

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        x = (s1 * 5) & _MASK64
        result = ((((x << 7) | (x >> 57)) & _MASK64) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def exponential(self, rate: float) -> float:
        return -math.log(1.0 - self.random()) / rate

    def binomial(self, n: int, p: float) -> int:
        """Binomial(n, p) by geometric skips; O(n * min(p, 1-p)) expected."""
        if n <= 0 or p <= 0.0:
            return 0
        if p >= 1.0:
            return n
        q = p if p <= 0.5 else 1.0 - p
        log1q = math.log(1.0 - q)
        count = 0
        y = 0
        while True:
            u = 1.0 - self.random()  # in (0, 1]
            y += int(math.log(u) / log1q) + 1
            if y > n:
                break
            count += 1
        return count if p <= 0.5 else n - count

    def uniform_index(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.random() * n)
