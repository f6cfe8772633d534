"""Deterministic, counter-based random streams.

A stream is identified by a 64-bit key. Draw ``j`` is a pure function of
``(key, j)`` (splitmix64 finalizer applied to ``key + (j + 1) * 0x9E3779B97F4A7C15``),
so any draw can be reproduced without replaying the ones before it and results
do not depend on how work is split across processes. Child streams are keyed by
``mix64(key + (index + 1) * 0xD1B54A32D192ED03)``.
"""

from __future__ import annotations

import numpy as np

from ._kernels import microsim as _k

ALGORITHM = "splitmix64-counter/v1"


def _as_u64(seed) -> int:
    seed = int(seed)
    if not 0 <= seed <= _k.MASK64:
        raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {seed}")
    return seed


def derive_seed(seed: int, index: int) -> int:
    """Key of child stream ``index`` of the stream keyed ``seed``."""
    return int(_k.derive_keys_numpy(_as_u64(seed), np.uint64(index)))


class RngStream:
    """Sequential view of a counter-based stream."""

    algorithm = ALGORITHM

    def __init__(self, seed: int, counter: int = 0):
        self.seed = _as_u64(seed)
        self.counter = int(counter)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, counter={self.counter})"

    def uniform(self) -> float:
        """Next draw, in the open interval (0, 1)."""
        return float(self.uniforms(1)[0])

    def uniforms(self, size: int) -> np.ndarray:
        c = np.arange(self.counter, self.counter + size, dtype=np.uint64)
        self.counter += size
        return _k.uniforms_numpy(np.uint64(self.seed), c)

    def spawn(self, index: int) -> RngStream:
        return RngStream(derive_seed(self.seed, index))

    def spawn_keys(self, n: int) -> np.ndarray:
        """Keys of children ``0 .. n-1`` as a uint64 array."""
        return _k.derive_keys_numpy(self.seed, np.arange(n, dtype=np.uint64))
