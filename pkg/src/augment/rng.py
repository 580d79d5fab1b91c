"""
Pinned PRNG - xoshiro256** seeded through SplitMix64

Every random decision in the lab (cohort generation, epoch shuffles, text
augmentation, recombination plans, parameter init) draws from this generator
so that identical seeds give identical results on every platform.

STREAM DERIVATION:
    h = splitmix64(seed)
    for each id: h = splitmix64(h XOR (id + 0x9E3779B97F4A7C15))     (mod 2**64)
The derived generator is seeded from h. Independent streams for
(seed, epoch, patient, anatomy) therefore never depend on scheduling order.
"""

import math

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(value):
    """One SplitMix64 output for the given state (the state is advanced first)."""
    z = (value + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


def derive_seed(seed, *stream_ids):
    """Mix a global seed and stream ids into a 64-bit seed."""
    h = splitmix64(int(seed) & MASK64)
    for stream_id in stream_ids:
        h = splitmix64(h ^ ((int(stream_id) + GOLDEN_GAMMA) & MASK64))
    return h


class Rng:
    """
    xoshiro256** generator.

    Args:
        seed (int): Global seed
        stream (tuple): Stream ids mixed into the seed (see module docstring)
    """

    def __init__(self, seed=0, stream=()):
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        state = derive_seed(self.seed, *self.stream)
        words = []
        for _ in range(4):
            words.append(splitmix64(state))
            state = (state + GOLDEN_GAMMA) & MASK64
        self._state = words
        self._spare_normal = None

    @classmethod
    def from_state(cls, words):
        """Build a generator from an explicit 4-word state (reference vectors)."""
        if len(words) != 4 or not any(words):
            raise ValueError("xoshiro256** needs four words, not all zero")
        rng = cls.__new__(cls)
        rng.seed = None
        rng.stream = ()
        rng._state = [int(w) & MASK64 for w in words]
        rng._spare_normal = None
        return rng

    def derive(self, *stream_ids):
        """Independent generator for a sub-stream of this generator's seed."""
        return Rng(self.seed, self.stream + tuple(stream_ids))

    def next_u64(self):
        s0, s1, s2, s3 = self._state
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._state = [s0, s1, s2, s3]
        return result

    def random(self):
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low, high):
        return low + (high - low) * self.random()

    def randbelow(self, n):
        """Unbiased integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError(f"randbelow needs a positive bound, got {n}")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, low, high):
        """Uniform integer in [low, high] inclusive."""
        return low + self.randbelow(high - low + 1)

    def shuffle(self, items):
        """Fisher-Yates shuffle in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def bernoulli(self, p):
        return self.random() < p

    def normal(self):
        """Standard normal via Box-Muller; the second variate is cached."""
        if self._spare_normal is not None:
            value, self._spare_normal = self._spare_normal, None
            return value
        u1 = 1.0 - self.random()  # (0, 1]
        u2 = self.random()
        radius = math.sqrt(-2.0 * math.log(u1))
        angle = 2.0 * math.pi * u2
        self._spare_normal = radius * math.sin(angle)
        return radius * math.cos(angle)

    def normal_array(self, shape, scale=1.0):
        """Array of independent N(0, scale^2) draws, filled in row-major order."""
        count = int(np.prod(shape)) if shape else 1
        draws = [self.normal() for _ in range(count)]
        return (np.array(draws, dtype=np.float64) * scale).reshape(shape)

    def uniform_array(self, shape, low, high):
        """Array of independent U[low, high) draws, filled in row-major order."""
        count = int(np.prod(shape)) if shape else 1
        draws = [self.uniform(low, high) for _ in range(count)]
        return np.array(draws, dtype=np.float64).reshape(shape)
