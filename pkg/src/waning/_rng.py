"""Keyed random streams.

All randomness flows through :func:`stream`, which maps ``(seed, *keys)`` to an
independent Philox generator. Work is split into fixed-size blocks whose keys
depend only on the block index, so results do not depend on how blocks are
scheduled across threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

_MASK64 = (1 << 64) - 1


def _key(value) -> int:
    if isinstance(value, str):
        # stable across interpreter runs, unlike hash()
        return int.from_bytes(value.encode("utf-8")[:8].ljust(8, b"\0"), "little")
    if isinstance(value, float):
        return int(round(value * 1_000_000)) & _MASK64
    return int(value) & _MASK64


def seed_sequence(seed: int, *keys) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(_key(k) for k in keys))


def stream(seed: int, *keys) -> np.random.Generator:
    """Generator for the substream identified by ``keys`` under ``seed``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *keys)))


def derive_seed(seed: int, *keys) -> int:
    """A 63-bit integer seed for a child computation."""
    hi, lo = seed_sequence(seed, *keys).generate_state(2, dtype=np.uint32)
    return ((int(hi) << 32) | int(lo)) >> 1


def ordered_map(fn: Callable[[int], T], indices: Sequence[int], workers: int = 1) -> list[T]:
    """``[fn(i) for i in indices]``, optionally on a thread pool; order is preserved."""
    if workers <= 1 or len(indices) <= 1:
        return [fn(i) for i in indices]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, indices))
