"""Random streams.

Every replication owns a PCG64 generator seeded from
``SeedSequence(master_seed, spawn_key=(index,))``, so substream k is addressable
without drawing substreams 0..k-1. Gaussian increments come from numpy's ziggurat
``standard_normal`` and are always drawn in blocks of ``noise_chunk`` steps.
"""
from typing import List, Optional, Sequence

import numpy as np

from src.core.errors import ValidationError

MAX_SEED = 2 ** 64


def validate_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < MAX_SEED:
        raise ValidationError("seed must satisfy 0 <= seed < 2**64")
    return int(seed)


def stream(master_seed: int, index: Optional[int] = None) -> np.random.Generator:
    master_seed = validate_seed(master_seed)
    if index is None:
        sequence = np.random.SeedSequence(master_seed)
    else:
        if index < 0:
            raise ValidationError("stream index must be >= 0")
        sequence = np.random.SeedSequence(master_seed, spawn_key=(int(index),))
    return np.random.Generator(np.random.PCG64(sequence))


def streams(master_seed: int, indices: Sequence[int]) -> List[np.random.Generator]:
    return [stream(master_seed, index) for index in indices]


def gaussian_block(generators: Sequence[np.random.Generator], size: int) -> np.ndarray:
    return np.stack([g.standard_normal(size) for g in generators])
