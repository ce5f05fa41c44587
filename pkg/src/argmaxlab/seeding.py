"""Deterministic seed derivation for Monte Carlo replications.

Every replication draws from its own PCG64 stream seeded with
``derive_seed(base_seed, rep_index)``.  The mixing function is the
SplitMix64 finalizer; both it and the derivation rule are part of the
reproducibility contract and must not change between versions.
"""

from __future__ import annotations

import zlib

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer applied to ``x + GOLDEN_GAMMA`` (mod 2**64)."""
    z = (int(x) + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, rep_index: int) -> int:
    """Seed for replication ``rep_index`` under ``base_seed``.

    ``seed_rep = mix64(mix64(base_seed) ^ rep_index)``
    """
    if rep_index < 0:
        raise ValueError("rep_index must be nonnegative")
    return mix64(mix64(int(base_seed) & MASK64) ^ (int(rep_index) & MASK64))


def substream(base_seed: int, tag: str) -> int:
    """Base seed for a named sub-experiment (e.g. the limit sampler)."""
    return mix64((int(base_seed) & MASK64) ^ (zlib.crc32(tag.encode()) << 32))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & MASK64))


def rep_rng(base_seed: int, rep_index: int) -> np.random.Generator:
    return make_rng(derive_seed(base_seed, rep_index))
