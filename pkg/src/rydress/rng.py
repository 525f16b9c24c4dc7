"""Counter-based random streams keyed by (seed, stream index).

Every Monte Carlo shot or sample block draws from its own Philox stream, so
results do not depend on how the work is split across threads.
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for stream ``index`` under ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and stream index must be non-negative")
    key = (int(seed) & (2**64 - 1)) | (int(index) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def parallel_map(fn, items, threads=None):
    """Ordered map; ``threads`` caps the worker count (1 or None runs inline)."""
    items = list(items)
    if not threads or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
