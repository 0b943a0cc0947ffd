"""Order-preserving process pool for independent, pre-seeded tasks."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

from threadpoolctl import threadpool_limits


def _init_worker():
    # one BLAS thread everywhere, so float results match across worker counts
    threadpool_limits(1)


def run_tasks(fn, tasks, workers: int = 1) -> list:
    """``[fn(t) for t in tasks]``, optionally across ``workers`` processes.

    Results come back in task order whatever the scheduling.
    """
    tasks = list(tasks)
    if workers is None or workers <= 1 or len(tasks) <= 1:
        with threadpool_limits(1):
            return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as pool:
        return list(pool.map(fn, tasks, chunksize=1))
