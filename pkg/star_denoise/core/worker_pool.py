import threading

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List

import numpy as np


class PatchWorkerPool:
    """Fans per-patch work out over threads.

    The patch axis is split into contiguous chunks, one per worker, and the
    chunk results are concatenated in chunk order. Each patch is processed by
    the same code whatever the chunking, so results do not depend on the
    worker count.
    """

    def __init__(self, n_workers: int = 1):
        self.n_workers = max(1, int(n_workers))
        self.executor = (
            ThreadPoolExecutor(max_workers=self.n_workers, thread_name_prefix="patch")
            if self.n_workers > 1
            else None
        )
        self.processing_count = 0
        self.completed_chunks = 0
        self._lock = threading.Lock()

    def _run(self, function: Callable[..., np.ndarray], chunk: np.ndarray, kwargs) -> np.ndarray:
        with self._lock:
            self.processing_count += 1
        try:
            return function(chunk, **kwargs)
        finally:
            with self._lock:
                self.processing_count -= 1
                self.completed_chunks += 1

    def map_chunks(self, function: Callable[..., np.ndarray], batch: np.ndarray, **kwargs) -> np.ndarray:
        """Apply ``function`` to contiguous slices of ``batch`` along axis 0."""
        if self.executor is None or batch.shape[0] < 2:
            return self._run(function, batch, kwargs)

        bounds = np.linspace(0, batch.shape[0], min(self.n_workers, batch.shape[0]) + 1)
        bounds = bounds.round().astype(int)
        chunks: List[np.ndarray] = [batch[a:b] for a, b in zip(bounds[:-1], bounds[1:])]
        futures = [self.executor.submit(self._run, function, chunk, kwargs) for chunk in chunks]
        return np.concatenate([future.result() for future in futures], axis=0)

    def get_stats(self) -> Dict[str, Any]:
        with self._lock:
            return {
                "workers": self.n_workers,
                "processing": self.processing_count,
                "completed_chunks": self.completed_chunks,
            }

    def shutdown(self):
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None

    def __enter__(self) -> "PatchWorkerPool":
        return self

    def __exit__(self, *exc):
        self.shutdown()
