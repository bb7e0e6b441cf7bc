"""Counter-based random streams (SplitMix64).

Every stochastic routine in the package derives its randomness from
splitmix64(seed, counter), so sample i always sees the same stream no matter
how work is batched or scheduled.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def splitmix64(seed: int, counters) -> np.ndarray:
    """Mixed 64-bit words for the given counters (scalar or array)."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = (np.uint64(seed) + (c + np.uint64(1)) * _GOLDEN).astype(np.uint64)
        x ^= x >> np.uint64(30)
        x *= _M1
        x ^= x >> np.uint64(27)
        x *= _M2
        x ^= x >> np.uint64(31)
    return x


def uniform_stream(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """n uniforms in [0, 1), stream position given by the counter offset."""
    words = splitmix64(seed, np.arange(offset, offset + n, dtype=np.uint64))
    return (words >> np.uint64(11)).astype(np.float64) * (2.0**-53)
