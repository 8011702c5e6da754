"""Deterministic random-stream management.

All stochastic entry points accept either an integer seed, a
``numpy.random.Generator``, or a ``SeedSequence``. Internally every
independent unit of work (a bootstrap replicate, a Monte Carlo run) gets
its own substream derived from the master seed and the unit's index via
``SeedSequence(master, spawn_key=...)``. Substreams depend only on the
indices, never on scheduling, so results are identical for any worker
count.
"""

from __future__ import annotations

import numpy as np

RngLike = "int | np.random.Generator | np.random.SeedSequence | None"


def normalize_rng(seed) -> np.random.Generator:
    """Coerce an int / SeedSequence / Generator / None into a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(seed)


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Generator for the work unit identified by ``key`` under ``master_seed``.

    The same (seed, key) pair always yields the same stream; distinct keys
    yield statistically independent streams.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def substream_seed(master_seed: int, *key: int) -> int:
    """Stable integer seed for the work unit identified by ``key``.

    Used when a child task needs a plain int (e.g. to derive its own
    substreams) rather than a Generator.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
