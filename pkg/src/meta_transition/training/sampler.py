"""Seeded epoch-style mini-batch sampling with wraparound."""

from typing import Optional

import numpy as np

from ..core.rng import SeededRng
from ..errors import InvalidConfigError


class MiniBatchSampler:
    """Yields batches from a shuffled pool, reshuffling at each pass.

    A batch that runs past the end of the current pass is completed from the
    next shuffled pass, so batches may be larger than the pool.
    """

    def __init__(self, indices, batch_size: int, rng: SeededRng):
        """Initialize the sampler.

        Args:
            indices: Row indices forming the pool
            batch_size: Rows per batch
            rng: Stream used for the shuffles; owned by this sampler
        """
        self.indices = np.asarray(indices, dtype=np.int64)
        if self.indices.size == 0:
            raise InvalidConfigError("cannot sample batches from an empty pool")
        if batch_size < 1:
            raise InvalidConfigError(f"batch size must be >= 1, got {batch_size}")
        self.batch_size = int(batch_size)
        self.rng = rng
        self.epoch = 0
        self._order: Optional[np.ndarray] = None
        self._cursor = 0

    @property
    def batches_per_epoch(self) -> int:
        return -(-self.indices.size // self.batch_size)

    def _reshuffle(self) -> None:
        self._order = self.indices[self.rng.permutation(self.indices.size)]
        self._cursor = 0
        self.epoch += 1

    def next_batch(self) -> np.ndarray:
        """Indices of the next batch."""
        picked = []
        needed = self.batch_size
        while needed > 0:
            if self._order is None or self._cursor >= self._order.size:
                self._reshuffle()
            take = self._order[self._cursor:self._cursor + needed]
            picked.append(take)
            self._cursor += take.size
            needed -= take.size
        return np.concatenate(picked)
