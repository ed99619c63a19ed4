"""Counter-based splitmix64 streams.

Draw number c of the stream with key K is mix(K + (c + 1) * GOLDEN), so any
draw can be recomputed from (key, counter) alone. Keys are derived from
(seed, index), which makes per-trajectory streams independent of the order
or thread in which trajectories are run.
"""

from __future__ import annotations

import numba as nb
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INDEX_MUL = np.uint64(0xD1B54A32D192ED03)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


@nb.njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def stream_key(seed, index):
    s = mix64(np.uint64(seed) + _GOLDEN)
    return mix64(s ^ (np.uint64(index) * _INDEX_MUL + _ONE))


@nb.njit(cache=True, inline="always")
def uniform(key, counter):
    """Uniform on the open interval (0, 1) from draw number `counter`."""
    z = mix64(key + (np.uint64(counter) + _ONE) * _GOLDEN)
    return (np.float64(z >> _S11) + 0.5) * _INV53


def seed_to_uint(seed: int) -> np.uint64:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.uint64(seed % (1 << 64))


class RngStream:
    """Mutable cursor (key, counter) into a counter-based stream."""

    __slots__ = ("seed", "index", "key", "counter")

    def __init__(self, seed: int, index: int = 0, counter: int = 0):
        self.seed = int(seed)
        self.index = int(index)
        self.key = np.uint64(stream_key(seed_to_uint(self.seed), np.uint64(self.index)))
        self.counter = int(counter)

    def uniforms(self, n: int) -> np.ndarray:
        out = _uniform_block(self.key, np.uint64(self.counter), n)
        self.counter += n
        return out

    def copy(self) -> "RngStream":
        return RngStream(self.seed, self.index, self.counter)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, index={self.index}, counter={self.counter})"


@nb.njit(cache=True)
def _uniform_block(key, start, n):
    out = np.empty(n)
    for i in range(n):
        out[i] = uniform(key, start + np.uint64(i))
    return out
