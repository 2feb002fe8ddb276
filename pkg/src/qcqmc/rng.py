"""Counter-based random streams derived from a single root seed.

Every consumer asks for ``stream_rng(root, name, *counters)``; the result
depends only on those arguments, so results do not depend on how work is
split between workers.
"""

from __future__ import annotations

import numpy as np

STREAMS = {"collection": 1, "calibration": 2, "fields": 3, "noise": 4, "walkers": 5, "study": 6}


def stream_seed(root: int, name: str, *counters: int) -> np.random.SeedSequence:
    if name not in STREAMS:
        raise ValueError(f"unknown random stream {name!r}")
    key = (STREAMS[name],) + tuple(int(c) for c in counters)
    return np.random.SeedSequence(int(root), spawn_key=key)


def stream_rng(root: int, name: str, *counters: int) -> np.random.Generator:
    return np.random.default_rng(stream_seed(root, name, *counters))
