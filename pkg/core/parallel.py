"""
Chunked Parallel Map
Process-pool fan-out for independent Monte Carlo chunks
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional, Sequence

from django.conf import settings

logger = logging.getLogger('wbpdecode')


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit count, else WBPDECODE_CONFIG['WORKERS']; never below 1."""
    if workers is None:
        workers = settings.WBPDECODE_CONFIG['WORKERS']
    return max(1, int(workers))


class ChunkRunner:
    """
    Maps a picklable function over work chunks, in order.

    With one worker everything runs in-process; otherwise a
    ProcessPoolExecutor is kept open for the lifetime of the runner.
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = resolve_workers(workers)
        self._pool = None

    def __enter__(self):
        if self.workers > 1:
            self._pool = ProcessPoolExecutor(max_workers=self.workers)
            logger.debug(f"Started process pool with {self.workers} workers")
        return self

    def __exit__(self, exc_type, exc, tb):
        if self._pool is not None:
            self._pool.shutdown(cancel_futures=exc_type is not None)
            self._pool = None
        return False

    def map(self, fn: Callable, tasks: Sequence) -> List:
        if self._pool is None or len(tasks) <= 1:
            return [fn(task) for task in tasks]
        return list(self._pool.map(fn, tasks))
