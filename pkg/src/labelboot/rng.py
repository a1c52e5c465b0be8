"""Counter-based random substreams.

Every random quantity is addressed by ``(seed, path, purpose, index...)``.
The first three fix a Philox key; the indices (replication, retry attempt)
are written into the high words of the Philox counter, so each addressed
stream is disjoint and can be regenerated in isolation. Results therefore do
not depend on how work is split across threads.
"""

from __future__ import annotations

import enum
from functools import lru_cache

import numpy as np


class Purpose(enum.IntEnum):
    DATA = 0
    EXTERNAL = 1
    WEIGHTS = 2
    LABELS = 3
    RATES = 4


@lru_cache(maxsize=4096)
def _key(seed: int, path: tuple[int, ...]) -> tuple[int, int]:
    state = np.random.SeedSequence(seed, spawn_key=path).generate_state(2, np.uint64)
    return int(state[0]), int(state[1])


class Streams:
    """Factory for addressed generators under one master seed."""

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned value, got {seed}")
        self.seed = seed
        self.path = tuple(int(p) for p in path)

    def child(self, *path: int) -> Streams:
        return Streams(self.seed, self.path + tuple(int(p) for p in path))

    def generator(self, purpose: Purpose, *index: int) -> np.random.Generator:
        if len(index) > 3:
            raise ValueError("at most three index words")
        key = np.array(_key(self.seed, self.path + (int(purpose),)), dtype=np.uint64)
        counter = np.zeros(4, dtype=np.uint64)
        for j, v in enumerate(index):
            counter[3 - j] = int(v)
        return np.random.Generator(np.random.Philox(key=key, counter=counter))

    def __repr__(self):
        return f"Streams(seed={self.seed}, path={self.path})"
