"""Hierarchical counter-based random streams.

Every random number in the package comes from a :class:`Stream`.  A stream
is a pure value ``(seed, path)``; turning it into a generator builds a
Philox4x64-10 bit generator keyed by ``numpy.random.SeedSequence(seed,
spawn_key=path)``.  Children are addressed by integer ids, so the stream a
block of prior draws uses depends only on the seed and the block index,
never on how work is split between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GENERATOR_FAMILY = "philox4x64-10/seedsequence"

# Draws are produced in fixed-size blocks; block b always uses stream
# ``prior.child(b)``.
BLOCK_SIZE = 4096

# Top-level stream ids below a run's root stream.
PRIOR = 0
RESAMPLE = 1
REPLICATE = 2


@dataclass(frozen=True)
class Stream:
    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if int(self.seed) < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if any(int(p) < 0 for p in self.path):
            raise ValueError(f"stream ids must be non-negative, got {self.path}")

    def child(self, *ids: int) -> "Stream":
        return Stream(self.seed, self.path + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.seed), spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))

    def describe(self) -> dict:
        return {
            "generator": GENERATOR_FAMILY,
            "seed": int(self.seed),
            "path": list(self.path),
            "block_size": BLOCK_SIZE,
        }


def as_stream(rng) -> Stream:
    """Accept a :class:`Stream` or an integer seed."""
    if isinstance(rng, Stream):
        return rng
    if isinstance(rng, (int, np.integer)) and not isinstance(rng, bool):
        return Stream(int(rng))
    raise TypeError(f"expected a Stream or an integer seed, got {type(rng).__name__}")
