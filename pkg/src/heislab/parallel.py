"""Deterministic block-parallel map.

Work is split into independent payloads whose results are combined in
payload order, so totals never depend on the worker count.  Randomness
must be derived from indices carried inside the payloads, never from
shared state.  Workers receive (fn, payload) through pickling, so fn
must be a module-level callable.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def block_map(fn, payloads: list, workers: int = 1) -> list:
    """[fn(p) for p in payloads], optionally across processes, order kept."""
    payloads = list(payloads)
    if not payloads:
        return []
    if workers <= 1 or len(payloads) == 1:
        return [fn(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, payloads))
