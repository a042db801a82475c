import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    raw = os.environ.get("OPDERIV_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def parallel_map(fn, items):
    """Order-preserving map over independent grid points.

    numpy/scipy release the GIL inside LAPACK/ARPACK calls, so threads are
    enough. Results come back in input order, which keeps reports
    deterministic regardless of scheduling.
    """
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
