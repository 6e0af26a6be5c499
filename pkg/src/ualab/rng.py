"""Reproducible random number streams.

Streams are keyed by (seed, module offset, stream_id). The triple is fed to
``numpy.random.SeedSequence`` as entropy, so a given key always yields the
same generator state no matter how many workers are running or in which
order trials execute. Per-trial code derives stream_id from the trial index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Per-module offsets keep streams disjoint when two modules use the same
# trial index under one experiment seed.
OFFSET_SAMPLING = 0
OFFSET_MODEL = 1
OFFSET_TRAJECTORIES = 2
OFFSET_ROUCHE = 3
OFFSET_CUESTATS = 4
OFFSET_RUNNER = 5


@dataclass(frozen=True)
class RngStream:
    """Deterministic generator factory for one (seed, stream) pair."""

    seed: int
    stream_id: int = 0
    offset: int = OFFSET_SAMPLING

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=[self.seed, self.offset, self.stream_id])
        return np.random.Generator(np.random.PCG64(ss))


def stream(seed: int, stream_id: int = 0, offset: int = OFFSET_SAMPLING) -> np.random.Generator:
    """Return the generator for (seed, stream_id) under a module offset."""
    return RngStream(seed, stream_id, offset).generator()
