"""Seeded counter-mode RNG used by every generator in the package.

All randomness flows through a single, fully specified 64-bit mixing
construction (splitmix64) so that streams can be reproduced exactly from
the seed alone, in any language:

    output[i] = mix64(seed + (i + 1) * 0x9E3779B97F4A7C15)   (mod 2^64)

with

    mix64(z): z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
              z ^= z >> 27;  z *= 0x94D049BB133111EB
              z ^= z >> 31;  return z

Uniform doubles take the top 53 bits: (output >> 11) * 2**-53.

Counter mode (rather than iterated state) lets blocks of any size be
drawn without changing the stream, and makes substreams cheap.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SUBSTREAM_SALT = np.uint64(0xD1B54A32D192ED03)

_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)


def mix64(z):
    """splitmix64 finalizer on uint64 scalars or arrays (wraps mod 2^64)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def substream_seed(seed: int, tag: int) -> int:
    """Derive an independent stream seed from (seed, tag), deterministically."""
    with np.errstate(over="ignore"):
        z = mix64(np.uint64(seed) + GOLDEN * np.uint64(np.int64(tag) + 1))
    return int(z ^ _SUBSTREAM_SALT)


class Stream:
    """Stateful view of the counter-mode splitmix64 stream for one seed."""

    def __init__(self, seed: int):
        self.seed = np.uint64(seed)
        self.counter = np.uint64(0)

    def u64(self, n: int) -> np.ndarray:
        idx = np.arange(1, n + 1, dtype=np.uint64) + self.counter
        self.counter += np.uint64(n)
        with np.errstate(over="ignore"):
            return mix64(self.seed + GOLDEN * idx)

    def uniform(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        u = (self.u64(n) >> _S11).astype(np.float64) * 2.0 ** -53
        return lo + (hi - lo) * u

    def integers(self, n: int, bound: int) -> np.ndarray:
        """n integers in [0, bound), as floor(uniform * bound)."""
        return np.minimum((self.uniform(n) * bound).astype(np.int64), bound - 1)

    def spawn(self, tag: int) -> "Stream":
        return Stream(substream_seed(int(self.seed), tag))


def rank_keys(seed: int, n: int) -> np.ndarray:
    """Deterministic pseudorandom ranking of 0..n-1 (used to sample cells)."""
    with np.errstate(over="ignore"):
        keys = mix64(np.uint64(seed)
                     + GOLDEN * (np.arange(n, dtype=np.uint64) + np.uint64(1)))
    return np.argsort(keys, kind="stable")
