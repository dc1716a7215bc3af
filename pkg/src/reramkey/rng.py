"""Reproducible random streams.

Every stream is a Philox (counter-based) generator keyed by a master seed and
a path of integers, e.g. ``stream(seed, trial, 2)``. Streams for different
paths are independent and can be created in any order or process.
"""
from __future__ import annotations

import numpy as np


def stream(seed, *path: int) -> np.random.Generator:
    """``seed`` may itself be a tuple ``(master, i, j, ...)``; it is prefixed to ``path``."""
    if isinstance(seed, (tuple, list)):
        seed, path = seed[0], tuple(seed[1:]) + path
    if int(seed) < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))
