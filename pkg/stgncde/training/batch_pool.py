"""Forward/backward of one mini-batch split into chunks, each on its own tape.

Chunks may run on worker threads; losses and gradients are always reduced in
chunk order, so results do not depend on which thread finishes first.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional

import numpy as np

from ..autodiff import Tape, Tensor, backward
from ..data import WindowBatch
from ..utils.logger import logger


class ChunkStatus(Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class ChunkTask:
    index: int
    rows: np.ndarray
    status: ChunkStatus = ChunkStatus.PENDING
    loss: float = 0.0
    grads: Dict[Tensor, np.ndarray] = field(default_factory=dict)
    error: Optional[BaseException] = None


# chunk loss builder: (chunk of a batch, total entry count of the batch) -> scalar loss on the tape
ChunkLoss = Callable[[WindowBatch, int], Tensor]


def split_rows(count: int, num_chunks: int) -> List[np.ndarray]:
    num_chunks = max(1, min(num_chunks, count))
    return [rows for rows in np.array_split(np.arange(count), num_chunks) if len(rows)]


def _sub_batch(batch: WindowBatch, rows: np.ndarray) -> WindowBatch:
    if len(rows) == len(batch):
        return batch
    return WindowBatch(
        inputs=batch.inputs[rows],
        targets=batch.targets[rows],
        masks=batch.masks[rows],
        norm_stats=batch.norm_stats,
        paths=batch.paths[rows],
        indices=batch.indices[rows],
    )


class GradientPool:
    """Runs chunk tapes with up to `max_workers` threads"""

    def __init__(self, params: List[Tensor], max_workers: int = 1):
        self.params = list(params)
        self.max_workers = max(1, max_workers)
        self._executor: Optional[ThreadPoolExecutor] = None
        if self.max_workers > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.max_workers, thread_name_prefix="stgncde-grad")

    def __enter__(self) -> "GradientPool":
        return self

    def __exit__(self, exc_type, exc, tb):
        self.close()
        return False

    def close(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def _execute(self, task: ChunkTask, batch: WindowBatch, total: int, loss_fn: ChunkLoss) -> ChunkTask:
        task.status = ChunkStatus.RUNNING
        try:
            with Tape():
                loss = loss_fn(_sub_batch(batch, task.rows), total)
                task.loss = loss.item()
                task.grads = backward(loss, wrt=self.params)
            task.status = ChunkStatus.COMPLETED
        except Exception as e:
            task.status = ChunkStatus.FAILED
            task.error = e
        return task

    def run(self, batch: WindowBatch, loss_fn: ChunkLoss):
        """Returns (batch loss, gradient per parameter) summed over chunks in order"""
        total = int(batch.targets.size)
        tasks = [ChunkTask(i, rows) for i, rows in enumerate(split_rows(len(batch), self.max_workers))]

        if self._executor is None or len(tasks) == 1:
            for task in tasks:
                self._execute(task, batch, total, loss_fn)
        else:
            futures = [self._executor.submit(self._execute, task, batch, total, loss_fn) for task in tasks]
            for future in futures:
                future.result()

        for task in tasks:
            if task.status == ChunkStatus.FAILED:
                logger.debug(f"Gradient chunk {task.index} failed: {task.error}")
                raise task.error

        loss = 0.0
        grads = {p: np.zeros_like(p.data) for p in self.params}
        for task in tasks:
            loss += task.loss
            for param in self.params:
                grads[param] += task.grads[param]
        return loss, grads
