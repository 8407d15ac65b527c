"""Deterministic substream derivation.

All randomness flows from one master seed through ``SeedSequence`` keyed by
structural indices (repetition, weight-vector index, ...), so results never
depend on worker count or scheduling.
"""

from __future__ import annotations

import numpy as np

_MASK63 = (1 << 63) - 1


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed for the substream ``(seed, *keys)``."""
    ss = np.random.SeedSequence([int(seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0]) & _MASK63


def substream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *(int(k) for k in keys)])))
