"""Deterministic, splittable random streams.

Every stochastic component in the library draws from a substream derived from a
master seed plus an integer path, e.g. ``substream(seed, circuit_index, term_index)``.
Philox is counter-based, so substreams are independent and reproducible regardless
of execution order or batching.
"""

from __future__ import annotations

import numpy as np


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Return a generator for the substream identified by ``path`` under ``master_seed``."""
    if master_seed < 0:
        raise ValueError("seed must be non-negative")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(master_seed: int, *path: int) -> int:
    """A plain child seed for components that accept only an integer seed."""
    if master_seed < 0:
        raise ValueError("seed must be non-negative")
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, np.uint64)[0])
