"""Reproducible counter-based random streams.

All stochastic parts of the package (Gaussian probe states, Monte Carlo
ensemble sampling) draw from Philox4x32-10 generators.  Independent
substreams are derived from a single user seed by keying the generator
with ``SeedSequence(seed, spawn_key=(crc32(purpose), index))``, so results
are reproducible regardless of how work is scheduled across threads: the
stream for probe state 17 of a fidelity run is the same whether it is
computed first, last, or concurrently with the others.
"""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    """Return the Philox generator for one (seed, purpose, index) substream.

    ``purpose`` is a short ASCII tag naming the consumer ("trace-state",
    "mc-realization", ...); ``index`` enumerates parallel units of work.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    key = np.random.SeedSequence(
        entropy=seed, spawn_key=(zlib.crc32(purpose.encode("ascii")), index)
    )
    return np.random.Generator(np.random.Philox(key))
