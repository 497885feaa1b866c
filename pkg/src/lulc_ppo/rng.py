"""Deterministic random number generation.

All stochastic behavior in this package (weight init, action sampling,
minibatch shuffling) draws from xoshiro256**, a public-domain shift-register
generator with a 256-bit state. The state transition is fixed bit-exactly so
that trajectories are reproducible from a single 64-bit seed, independent of
platform or numpy version.

State: four unsigned 64-bit words s0..s3, never all zero.

    next():
        result = rotl(s1 * 5, 7) * 9          (mod 2^64)
        t  = s1 << 17                          (mod 2^64)
        s2 ^= s0 ; s3 ^= s1 ; s1 ^= s2 ; s0 ^= s3
        s2 ^= t
        s3  = rotl(s3, 45)
        return result

Seeding expands the seed through splitmix64 (state += 0x9E3779B97F4A7C15;
z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) *
0x94D049BB133111EB; return z ^ z>>31), taking four successive outputs as
s0..s3. Worker stream k seeds from (seed + k * 0x9E3779B97F4A7C15) mod 2^64.

Derived draws:
    random()      -> float64 in [0, 1): (next() >> 11) * 2^-53
    randbelow(n)  -> next() % n  (modulo reduction; bias < n / 2^64)
    shuffle(a)    -> Fisher-Yates from the top using randbelow
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step; returns (new_state, output)."""
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """xoshiro256** generator; see module docstring for the exact transition."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int, stream: int = 0):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        state = (seed + stream * _GOLDEN) & MASK64
        state, self.s0 = splitmix64(state)
        state, self.s1 = splitmix64(state)
        state, self.s2 = splitmix64(state)
        state, self.s3 = splitmix64(state)
        if self.s0 == self.s1 == self.s2 == self.s3 == 0:  # pragma: no cover
            self.s0 = 1

    def next_u64(self) -> int:
        s1 = self.s1
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 = self.s2 ^ self.s0
        s3 = self.s3 ^ s1
        self.s1 = s1 ^ s2
        self.s0 = self.s0 ^ s3
        self.s2 = s2 ^ t
        self.s3 = _rotl(s3, 45)
        return result

    def random(self) -> float:
        """Uniform float64 in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def shuffle(self, a) -> None:
        """In-place Fisher-Yates shuffle of a mutable sequence or 1-d array."""
        for i in range(len(a) - 1, 0, -1):
            j = self.randbelow(i + 1)
            a[i], a[j] = a[j], a[i]

    def getstate(self) -> tuple[int, int, int, int]:
        return (self.s0, self.s1, self.s2, self.s3)

    def setstate(self, state) -> None:
        s0, s1, s2, s3 = (int(w) for w in state)
        for w in (s0, s1, s2, s3):
            if not 0 <= w <= MASK64:
                raise ValueError("state words must be unsigned 64-bit integers")
        if s0 == s1 == s2 == s3 == 0:
            raise ValueError("state must not be all zero")
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
