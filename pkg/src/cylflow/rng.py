"""Counter-based randomness.

Every random draw in the package comes from a Philox generator keyed by
(master_seed, sample_index, purpose).  Streams are therefore pure functions
of those three values: flipping an edge, slicing a sub-cylinder or farming
samples to workers can never perturb any other draw, and any evaluation
order reproduces the same fields bit-exactly.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# One stream per kind of draw; codes must stay stable for reproducibility.
PURPOSES = {
    "capacity": 1,
    "fresh_capacity": 2,
    "noise_threshold": 3,
    "penalty": 4,
    "vertex_weight": 5,
    "es_coordinate": 6,
    "es_value": 7,
    "instance": 8,
}


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def philox_key(master_seed: int, sample_index: int, purpose: str) -> int:
    """128-bit Philox key, injective in (seed, index, purpose) for index < 2**60."""
    code = PURPOSES[purpose]
    low = _splitmix64((((sample_index & _MASK64) << 4) | code) & _MASK64)
    return ((master_seed & _MASK64) << 64) | low


def generator(master_seed: int, sample_index: int, purpose: str) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=philox_key(master_seed, sample_index, purpose))
    )


def uniforms(master_seed: int, sample_index: int, purpose: str, size: int) -> np.ndarray:
    """size i.i.d. uniform[0,1) draws; entry i is a pure function of (key, i)."""
    return generator(master_seed, sample_index, purpose).random(size)
