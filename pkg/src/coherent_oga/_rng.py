"""Seeded random streams.

Every random draw in the package goes through :func:`make_rng`, which wraps
numpy's Philox4x64-10 counter-based bit generator. Philox is fully specified
(Salmon et al., "Parallel random numbers: as easy as 1, 2, 3", SC11), so a
seed reproduces the same stream on any platform and numpy version that
keeps the algorithm.
"""

import numpy as np

RNG_NAME = "philox4x64-10"
RNG_VERSION = 1


def make_rng(seed, stream=0):
    """Generator for ``seed``; distinct ``stream`` values give independent draws."""
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(key=[seed, int(stream)]))
