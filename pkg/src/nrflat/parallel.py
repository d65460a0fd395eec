"""Worker-count policy and an order-preserving parallel map."""

import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor

ENV_VAR = "NR_THREADS"


def worker_count(default=None):
    """
    Number of workers allowed by ``NR_THREADS``.

    ``0`` or an unset variable means one worker per CPU.  Invalid values
    raise ``ValueError`` rather than being silently ignored.
    """
    raw = os.environ.get(ENV_VAR, "").strip()
    cpus = os.cpu_count() or 1
    if not raw:
        return default if default is not None else cpus
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be a non-negative integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{ENV_VAR} must be a non-negative integer, got {raw!r}")
    return cpus if n == 0 else n


def ordered_map(fn, items, workers=None, processes=False, chunksize=1):
    """``list(map(fn, items))``, optionally spread over a pool; order is preserved."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    workers = max(1, min(workers, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    if processes:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, items, chunksize=chunksize))
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))
