"""Deterministic random substreams.

Every random draw in the package flows from a single 64-bit master seed.
A substream is addressed by ``(seed, tag, *indices)``: the tag is hashed to a
32-bit integer with CRC-32 and, together with the indices, becomes the
``spawn_key`` of a :class:`numpy.random.SeedSequence` whose entropy is the
master seed.  Streams therefore depend only on their address, never on the
order in which work is scheduled.
"""
from __future__ import annotations

import os
import zlib

import numpy as np

DEFAULT_SEED = 20160817
SEED_ENV_VAR = "NETNORM_SEED"


def tag_key(tag: str) -> int:
    return zlib.crc32(tag.encode("utf-8")) & 0xFFFFFFFF


def seed_sequence(seed: int, tag: str, *indices: int) -> np.random.SeedSequence:
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    key = (tag_key(tag),) + tuple(int(i) for i in indices)
    if any(k < 0 for k in key):
        raise ValueError(f"substream indices must be non-negative: {indices}")
    return np.random.SeedSequence(entropy=int(seed), spawn_key=key)


def substream(seed: int, tag: str, *indices: int) -> np.random.Generator:
    """Return the generator addressed by ``(seed, tag, *indices)``."""
    return np.random.default_rng(seed_sequence(seed, tag, *indices))


def derive_seed(seed: int, tag: str, *indices: int) -> int:
    """A child master seed, for handing a whole sub-computation its own seed space."""
    return int(seed_sequence(seed, tag, *indices).generate_state(2, np.uint32).view(np.uint64)[0])


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV_VAR)
    if env:
        return int(env)
    return DEFAULT_SEED
