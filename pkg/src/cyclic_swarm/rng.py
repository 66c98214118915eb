"""Deterministic seeded random numbers with a pinned algorithm.

Simulation reproducibility is a contract of this package: the same seed must
produce byte-identical scenarios on every platform and Python build.  Library
default generators are not pinned that way, so the generator here is a fixed,
documented scheme:

* Stream: PCG32 (XSH-RR variant), O'Neill's 32-bit permuted congruential
  generator.  State update is the 64-bit LCG

      state <- state * 6364136223846793005 + increment   (mod 2**64)

  and each output word permutes the *previous* state:

      xorshifted = ((state >> 18) ^ state) >> 27         (32 bits)
      rot        = state >> 59
      out        = xorshifted rotated right by rot

* Seeding: the user seed and stream id are first whitened with splitmix64
  (Steele et al.), so trivially related seeds (0, 1, 2, ...) give unrelated
  streams.  The increment is forced odd, as PCG requires.

* Doubles: `uniform()` uses the top 53 bits of two output words, giving the
  standard dyadic rationals k * 2**-53 in [0, 1).

All arithmetic is integer modulo 2**64, so results are identical everywhere.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_PCG_MULT = 6364136223846793005


def _splitmix64(x: int) -> int:
    # one round of splitmix64; used only to whiten seeds
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class Pcg32:
    """PCG32 stream seeded by (seed, stream) pairs."""

    __slots__ = ("_state", "_inc")

    def __init__(self, seed: int, stream: int = 0) -> None:
        self._inc = ((_splitmix64(stream) << 1) | 1) & _MASK64
        self._state = 0
        self.u32()
        self._state = (self._state + _splitmix64(seed)) & _MASK64
        self.u32()

    def u32(self) -> int:
        old = self._state
        self._state = (old * _PCG_MULT + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def u64(self) -> int:
        hi = self.u32()
        return (hi << 32) | self.u32()

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        """Uniform double in [low, high); 53-bit resolution."""
        u = (self.u64() >> 11) * (2.0 ** -53)
        return low + (high - low) * u
