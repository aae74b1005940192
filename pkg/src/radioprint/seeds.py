"""Deterministic seed derivation for simulation entities.

Every randomized stage (device sampling, bit generation, channel noise, weight
init) draws from its own child generator.  Child seeds are derived from the
master seed by an avalanche mix of (master, stream tag, entity indices), so
results never depend on call order or on how work is split across threads.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# splitmix64 finalizer constants (Steele et al., fast-forwardable PRNG);
# used here purely as a 64-bit avalanche hash.
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """splitmix64 finalizer: avalanche-mix a 64-bit integer."""
    x = (x + _GAMMA) & _MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK64
    return x ^ (x >> 31)


def _tag_to_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & _MASK64
    if isinstance(tag, str):
        # FNV-1a over the UTF-8 bytes, stable across runs and platforms.
        h = 0xCBF29CE484222325
        for b in tag.encode("utf-8"):
            h = ((h ^ b) * 0x100000001B3) & _MASK64
        return h
    raise TypeError(f"seed tag must be int or str, got {type(tag).__name__}")


def child_seed(master_seed: int, *tags) -> int:
    """Derive a 64-bit child seed from a master seed and a tag path.

    Tags may be strings (stream names) or integers (entity indices).  Distinct
    tag paths give statistically independent seeds; the same path always gives
    the same seed.
    """
    s = int(master_seed) & _MASK64
    for tag in tags:
        s = mix64(s ^ _tag_to_int(tag))
    return s


def rng_for(master_seed: int, *tags) -> np.random.Generator:
    """Generator seeded by ``child_seed(master_seed, *tags)``."""
    return np.random.default_rng(child_seed(master_seed, *tags))
