"""Deterministic named RNG streams.

Every random decision in the package draws from a stream derived from
(master_seed, *names).  Streams with different names are statistically
independent, and the derivation uses hashlib so it does not depend on
PYTHONHASHSEED or platform.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _token(value) -> int:
    digest = hashlib.blake2b(str(value).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def seed_sequence(master_seed: int, *names) -> np.random.SeedSequence:
    """SeedSequence for the stream identified by (master_seed, *names)."""
    entropy = [int(master_seed) & _MASK64] + [_token(n) for n in names]
    return np.random.SeedSequence(entropy)


def rng_for(master_seed: int, *names) -> np.random.Generator:
    """Independent Generator for the named stream."""
    return np.random.Generator(np.random.PCG64(seed_sequence(master_seed, *names)))
