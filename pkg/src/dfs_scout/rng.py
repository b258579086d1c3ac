"""Seed handling.

Every stochastic operation in the package takes either an integer seed or a
ready ``numpy.random.Generator``; there is no global random state.  Child
streams are derived from a master seed by a counter-based split
(``SeedSequence`` spawn keys), so an ensemble member's stream depends only on
the master seed and its index, never on execution order.
"""

from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.Generator]


def as_generator(seed: SeedLike) -> np.random.Generator:
    """Return a PCG64 generator for an integer seed, or the generator itself."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an int or numpy Generator, got {type(seed)!r}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def derive_generator(master: int, *key: int) -> np.random.Generator:
    """Deterministic child stream keyed by (master, *key).

    Distinct keys give statistically independent streams; the same key always
    reproduces the same stream.
    """
    seq = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(master: int, *key: int) -> int:
    """A 64-bit integer child seed keyed by (master, *key)."""
    seq = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
