"""Reproducible random-stream derivation.

Every stochastic routine in the package draws from a substream derived from
(master seed, purpose tag, counter indices) via numpy's SeedSequence spawn
keys.  Streams are therefore independent of each other and of execution
order, which is what makes batched or multi-worker Monte Carlo runs
bit-reproducible.
"""

from __future__ import annotations

import zlib

import numpy as np


def _purpose_key(purpose: str) -> int:
    # crc32 is stable across platforms and runs, unlike hash()
    return zlib.crc32(purpose.encode("utf-8"))


def child_sequence(master_seed: int, purpose: str, *indices: int) -> np.random.SeedSequence:
    """SeedSequence for one (purpose, counter...) substream of a master seed."""
    return np.random.SeedSequence(master_seed, spawn_key=(_purpose_key(purpose), *indices))


def substream(master_seed: int, purpose: str, *indices: int) -> np.random.Generator:
    """Generator on the substream identified by (purpose, counter...)."""
    return np.random.Generator(np.random.PCG64(child_sequence(master_seed, purpose, *indices)))


def as_generator(seed, purpose: str) -> np.random.Generator:
    """Coerce an int seed / SeedSequence / Generator into a Generator.

    Integer seeds are tagged with ``purpose`` so that different operations
    called with the same integer do not share a stream.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    return substream(int(seed), purpose)
