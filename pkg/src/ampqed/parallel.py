"""Ordered fan-out over frequencies and compensated accumulation."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

THREADS_ENV = "AMPQED_THREADS"


def thread_count(default=1):
    """Worker count, overridable through the ``AMPQED_THREADS`` variable."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def ordered_map(fn, items, workers=None):
    """``[fn(x) for x in items]``, optionally on a thread pool; order is kept."""
    items = list(items)
    workers = thread_count() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


class CompensatedSum:
    """Neumaier summation of equally shaped arrays."""

    def __init__(self, shape, dtype=complex):
        self.total = np.zeros(shape, dtype=dtype)
        self.comp = np.zeros(shape, dtype=dtype)

    def add(self, term):
        term = np.asarray(term)
        t = self.total + term
        big = np.abs(self.total) >= np.abs(term)
        self.comp += np.where(big, (self.total - t) + term, (term - t) + self.total)
        self.total = t

    @property
    def value(self):
        return self.total + self.comp
