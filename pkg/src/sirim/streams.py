"""Counter-derived random streams usable inside compiled kernels.

Every sample ``i`` of a batch draws from its own stream seeded by
``derive_seed(master, i)``, so batch results do not depend on how samples
are spread over workers. The generator is SplitMix64: a 64-bit counter
pushed through a fixed bijective mixer.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0
MASK64 = (1 << 64) - 1

# "beyond any horizon" cap for geometric draws
FOREVER = 1 << 60


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _MUL1
    z = (z ^ (z >> _S27)) * _MUL2
    return z ^ (z >> _S31)


@njit(cache=True)
def derive_seed(master, index):
    """Seed of stream ``index`` under ``master`` (both taken as uint64)."""
    return mix64(mix64(np.uint64(master) ^ _MUL2) + np.uint64(index) * _GOLDEN)


@njit(cache=True, inline="always")
def uniform(state):
    """Next double in [0, 1); ``state`` is a length-1 uint64 array."""
    state[0] += _GOLDEN
    return np.float64(mix64(state[0]) >> _S11) * _INV53


@njit(cache=True, inline="always")
def bernoulli(state, p):
    return uniform(state) < p


@njit(cache=True)
def geometric(state, p, cap):
    """First success round of Bernoulli(``p``) trials, or ``cap + 1`` if later than ``cap``."""
    if p >= 1.0:
        return 1 if cap >= 1 else cap + 1
    if p <= 0.0:
        return cap + 1
    t = 1.0 + np.floor(np.log1p(-uniform(state)) / np.log1p(-p))
    if t > cap:
        return cap + 1
    return np.int64(t)


@njit(cache=True)
def geometric_by_rounds(state, p, cap):
    """Same law as :func:`geometric`, one coin per round."""
    for t in range(1, cap + 1):
        if uniform(state) < p:
            return t
    return cap + 1


def new_state(seed) -> np.ndarray:
    return np.array([int(seed) & MASK64], dtype=np.uint64)


def seed_from(stream: np.random.Generator) -> int:
    """Draw a 64-bit kernel seed from a numpy Generator."""
    return int(stream.integers(0, 1 << 63, dtype=np.int64)) * 2 + int(stream.integers(0, 2))


def master64(seed: int) -> np.uint64:
    return np.uint64(int(seed) & MASK64)


def sub_master(master: int, tag: int) -> int:
    """Independent master seed for a named sub-computation."""
    return int(derive_seed(master64(master), np.uint64(0xA5A5_0000 + tag)))


_threads = None


def set_threads(n) -> None:
    """Worker count for batch kernels; ``None`` means the machine's CPU count."""
    global _threads
    if n is not None and int(n) < 1:
        raise ValueError("thread count must be >= 1")
    _threads = None if n is None else int(n)


def get_threads() -> int:
    return _threads or os.cpu_count() or 1


CHUNK = 2048


def run_chunked(fn, total: int, start: int = 0, chunk: int = CHUNK, threads=None) -> list:
    """Apply ``fn(lo, hi)`` over fixed index chunks of ``[start, total)``.

    Chunk boundaries do not depend on the worker count and results come back
    in index order, which keeps batch outputs identical for any thread count.
    """
    bounds = [(lo, min(lo + chunk, total)) for lo in range(start, total, chunk)]
    workers = threads or get_threads()
    if workers == 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
