"""Counter-based SplitMix64 generator.

The k-th output (k = 0, 1, ...) of a stream with seed ``s`` is
``mix64(s + (k + 1) * GAMMA)`` with the standard SplitMix64 finalizer::

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

all arithmetic modulo 2**64.  Because the state update is a plain counter the
stream can be evaluated in vectorized blocks, and any implementation of the
same three lines reproduces the datasets bit for bit.

Derived quantities:

* uniform double in [0, 1): ``(x >> 11) * 2**-53``
* integer in [0, m): ``floor(uniform * m)``
* child seed for a key sequence ``(k1, k2, ...)``:
  ``s <- mix64(s ^ mix64(k + GAMMA))`` folded over the keys.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

_GAMMA = np.uint64(GAMMA)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def mix64(z: int) -> int:
    """Scalar SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic child seed for ``keys`` (e.g. a trial index)."""
    s = seed & MASK64
    for k in keys:
        s = mix64(s ^ mix64((k + GAMMA) & MASK64))
    return s


class SplitMix64:
    """Sequential view of the counter stream; ``draws`` advances the counter."""

    def __init__(self, seed: int):
        self.seed = int(seed) & MASK64
        self.counter = 0

    def next_u64(self, size: int) -> np.ndarray:
        k = np.arange(self.counter + 1, self.counter + size + 1, dtype=np.uint64)
        self.counter += size
        with np.errstate(over="ignore"):
            z = np.uint64(self.seed) + k * _GAMMA
            return _mix64_array(z)

    def uniform(self, size: int) -> np.ndarray:
        x = self.next_u64(size)
        return (x >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    def integers(self, high: int, size: int) -> np.ndarray:
        return np.floor(self.uniform(size) * high).astype(np.int64)
