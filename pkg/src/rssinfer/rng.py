"""Seeded, counter-derived random streams and the worker pool.

Work is cut into fixed-size blocks; block ``j`` of stream ``tag`` always gets
the generator keyed by ``(seed, tag, j)``.  Results therefore do not depend on
how many workers process the blocks, or in which order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

BLOCK = 1024

T = TypeVar("T")


def substream(seed: int, tag: int, block: int) -> np.random.Generator:
    """Philox generator for one block of one named stream."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(tag), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("RSS_INFER_THREADS", "0") or 0)
    if threads < 0:
        raise ValueError("thread count must be >= 0")
    return threads or (os.cpu_count() or 1)


def blocks(total: int, size: int = BLOCK) -> list[tuple[int, int, int]]:
    """Split ``range(total)`` into ``(block_index, start, stop)`` triples."""
    return [(j, s, min(s + size, total)) for j, s in enumerate(range(0, total, size))]


def run_blocks(fn: Callable[[int, int, int], T], parts: Sequence[tuple[int, int, int]],
               threads: int | None = None) -> list[T]:
    """Apply ``fn(block, start, stop)`` to every part; output order follows ``parts``."""
    workers = min(thread_count(threads), max(len(parts), 1))
    if workers <= 1:
        return [fn(*part) for part in parts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda part: fn(*part), parts))
