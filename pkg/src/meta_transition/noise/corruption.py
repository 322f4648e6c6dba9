"""Sampling noisy labels from a transition matrix."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core.rng import SeededRng
from ..errors import InvalidInputError
from .transition import check_row_stochastic

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class CorruptionReport:
    """Ground-truth T against the flip frequencies actually drawn."""
    ground_truth: np.ndarray
    empirical: np.ndarray
    class_counts: np.ndarray

    @property
    def max_entry_error(self) -> float:
        present = self.class_counts > 0
        if not np.any(present):
            return 0.0
        return float(np.max(np.abs(self.ground_truth[present] - self.empirical[present])))

    @property
    def flipped_fraction(self) -> float:
        total = self.class_counts.sum()
        if total == 0:
            return 0.0
        kept = np.diag(self.empirical) * self.class_counts
        return float(1.0 - kept.sum() / total)


def _check_labels(labels: np.ndarray, num_classes: int, name: str) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.ndim != 1:
        raise InvalidInputError(f"{name} must be a 1-D array")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise InvalidInputError(f"{name} out of range for {num_classes} classes")
    return labels


def corrupt_labels(clean_labels, matrix, rng: SeededRng) -> Tuple[np.ndarray, CorruptionReport]:
    """Resample every label from the categorical row of its clean class.

    One uniform draw per label is inverted through the cumulative row, so
    the stream is reproducible per seed.

    Args:
        clean_labels: Labels in ``[0, c)``
        matrix: Row-stochastic ``c x c`` transition matrix
        rng: Random stream

    Returns:
        (noisy labels, CorruptionReport)

    Raises:
        InvalidInputError: If the matrix is not row-stochastic or a label is
            out of range
    """
    t = check_row_stochastic(matrix)
    num_classes = t.shape[0]
    clean = _check_labels(clean_labels, num_classes, "clean labels")
    cdf = np.cumsum(t, axis=1)
    draws = rng.random(clean.size)
    noisy = np.sum(cdf[clean] <= draws[:, None], axis=1)
    noisy = np.minimum(noisy, num_classes - 1).astype(np.int64)
    report = CorruptionReport(
        ground_truth=t.copy(),
        empirical=empirical_transition(clean, noisy, num_classes),
        class_counts=np.bincount(clean, minlength=num_classes),
    )
    logger.debug("Corrupted %d labels, flipped fraction %.4f", clean.size, report.flipped_fraction)
    return noisy, report


def empirical_transition(clean_labels, noisy_labels, num_classes: int) -> np.ndarray:
    """Row ``i`` is the noisy-label histogram of samples with clean label ``i``.

    Classes absent from ``clean_labels`` get a uniform row.
    """
    clean = _check_labels(clean_labels, num_classes, "clean labels")
    noisy = _check_labels(noisy_labels, num_classes, "noisy labels")
    if clean.shape != noisy.shape:
        raise InvalidInputError(
            f"label arrays differ in length: {clean.size} vs {noisy.size}"
        )
    counts = np.zeros((num_classes, num_classes))
    np.add.at(counts, (clean, noisy), 1.0)
    totals = counts.sum(axis=1, keepdims=True)
    uniform = np.full((1, num_classes), 1.0 / num_classes)
    return np.where(totals > 0, counts / np.maximum(totals, 1.0), uniform)
