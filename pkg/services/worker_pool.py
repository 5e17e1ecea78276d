"""
Worker pool for independent units of work (point batches, multistarts, levels)
"""
import logging
from concurrent.futures import ThreadPoolExecutor

from config import get_config

logger = logging.getLogger(__name__)


class WorkerPool:
    """Thread pool whose results come back in input order

    The worker count only changes scheduling; every caller assembles its
    output from the ordered result list, so results never depend on it.
    """

    def __init__(self):
        self.threads = None
        self._initialized = False

    def _setup(self):
        if self._initialized:
            return
        self.threads = max(1, int(get_config().THREADS))
        self._initialized = True

    def set_threads(self, threads):
        """Cap the worker count (the CLI's --threads)"""
        self._setup()
        if threads:
            self.threads = max(1, int(threads))
            logger.debug(f"Worker pool capped at {self.threads} threads")

    def map(self, fn, items, threads=None):
        """Apply fn to every item, returning results in input order"""
        self._setup()
        items = list(items)
        workers = min(threads or self.threads, len(items))
        if workers <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix='refinekit') as executor:
            return list(executor.map(fn, items))

    @staticmethod
    def chunks(count, parts):
        """Split range(count) into at most `parts` contiguous (start, stop) slices"""
        parts = max(1, min(parts, count))
        bounds = [count * i // parts for i in range(parts + 1)]
        return [(bounds[i], bounds[i + 1]) for i in range(parts) if bounds[i] < bounds[i + 1]]


# Global worker pool instance
worker_pool = WorkerPool()
