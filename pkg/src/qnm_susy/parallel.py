"""Deterministic fan-out over independent work items."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "QNM_SUSY_THREADS"


def resolve_workers(requested: int = 0) -> int:
    """0 means auto: the env override if set, else the logical core count."""
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    if requested and requested > 0:
        return requested
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 0) -> List[R]:
    """Ordered map; results are combined in input order regardless of the
    completion order, so runs are deterministic."""
    n = resolve_workers(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
