"""SplitMix64: the single PRNG behind every seeded choice in the package.

SplitMix64 is a counter-based 64-bit generator (Steele, Lea & Flood 2014):
the state advances by a fixed odd constant and each output is a bijective
mix of the state.  It is defined entirely with 64-bit integer arithmetic,
so Python and C produce identical streams on every platform.

Derived quantities:

* ``below(m)`` maps an output ``z`` to ``(z * m) >> 64`` (multiply-high).
  The bias is at most ``m / 2**64``.
* ``random()`` returns ``(z >> 11) * 2**-53``, a double in ``[0, 1)``.
* ``derive_seed(*parts)`` folds integers into a fresh seed, so per-replicate
  or per-trial streams depend only on ``(seed, index)`` and never on the
  order in which work is scheduled.
"""
from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
DERIVE_START = 0x6A09E667F3BCC909
TWO_POW_M53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * MIX1) & MASK64
    z = ((z ^ (z >> 27)) * MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Combine integers into a 64-bit seed (order-sensitive)."""
    h = DERIVE_START
    for p in parts:
        h = mix64(((h ^ (int(p) & MASK64)) + GOLDEN) & MASK64)
    return h


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK64
        return mix64(self.state)

    def below(self, m: int) -> int:
        """Uniform integer in ``[0, m)``."""
        return (self.next_u64() * m) >> 64

    def random(self) -> float:
        return (self.next_u64() >> 11) * TWO_POW_M53

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates shuffle of ``range(n)``."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm
