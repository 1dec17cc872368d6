"""Shape-level worker pool.

Per-shape encoding is embarrassingly parallel; results are merged in input
order so pool size never changes any output. NPNET_THREADS caps the pool,
and 1 forces the sequential path.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "NPNET_THREADS"


def pool_size(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(ENV_THREADS, "")
    if env.strip():
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def worker_map(fn, items, workers: int | None = None) -> list:
    """Map preserving input order, threaded when it pays off."""
    items = list(items)
    n = pool_size(workers)
    if n <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
