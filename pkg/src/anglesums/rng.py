"""Reproducible random streams.

Every random draw in the package comes from a Philox (counter-based)
generator keyed by ``(seed, *keys)``, typically ``(seed, trial_index)``, so
results do not depend on how trials are split across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "as_generator", "SEED_MASK"]

SEED_MASK = (1 << 64) - 1


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``."""
    seq = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


def as_generator(seed) -> tuple[np.random.Generator, int | None]:
    """Accept an integer seed or an existing generator; returns ``(generator, seed_or_None)``."""
    if isinstance(seed, np.random.Generator):
        return seed, None
    return stream(int(seed)), int(seed) & SEED_MASK
