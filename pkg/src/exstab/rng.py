"""Seed handling and the SplitMix64 stream used for all random generation.

Every random object in the package is derived from a 64-bit master seed:

* ``mix(value, t) = finalize((value + (t + 1) * GOLDEN) mod 2**64)``
* ``finalize(z)``: ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all mod 2**64)
* A stream started at state ``s`` returns ``finalize(s + k * GOLDEN)`` for
  ``k = 1, 2, ...``.
* Trial ``t`` of an experiment uses the seed ``mix(master, t)``; row ``r`` of an
  instance generated from seed ``s`` is shuffled by the stream started at
  ``mix(s, r)``. Two-sided rows are numbered men ``0..n-1`` then women
  ``n..2n-1``.
* A uniform draw below ``bound`` rejects raw outputs ``x < 2**64 mod bound``
  and returns ``x % bound``.
* Rows are Fisher-Yates shuffles (``i = k-1 .. 1``, swap ``i`` with a uniform
  ``j <= i``) of the ascending candidate list, giving the preference order
  (most preferred first).

This module is the pure-Python reference; the compiled kernels in
:mod:`exstab._kernels` implement the same arithmetic and are tested against it.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractError

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def finalize(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix(value: int, t: int) -> int:
    """Derive the seed of sub-stream ``t`` from ``value``."""
    return finalize((value + (t + 1) * GOLDEN) & MASK64)


class SplitMix64:
    def __init__(self, state: int):
        self.state = state & MASK64

    def next(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return finalize(self.state)

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` without modulo bias."""
        threshold = (1 << 64) % bound
        while True:
            x = self.next()
            if x >= threshold:
                return x % bound

    def shuffle(self, items: list) -> list:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items


@dataclass(frozen=True)
class Seed:
    """A 64-bit master seed; ``derive(t)`` gives the seed of trial ``t``."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value <= MASK64:
            raise ContractError(f"seed must be a 64-bit unsigned integer, got {self.value}")

    def derive(self, t: int) -> "Seed":
        return Seed(mix(self.value, t))

    def stream(self, r: int) -> SplitMix64:
        return SplitMix64(mix(self.value, r))


def as_seed(seed: "Seed | int") -> Seed:
    return seed if isinstance(seed, Seed) else Seed(int(seed))
