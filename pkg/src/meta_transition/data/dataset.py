"""Labeled datasets with train/meta/test split tags."""

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from ..core.linalg import as_matrix
from ..core.rng import SeededRng
from ..errors import InvalidConfigError, InvalidInputError, ShapeError
from ..noise.corruption import CorruptionReport, corrupt_labels

logger = logging.getLogger(__name__)

TRAIN = "train"
META = "meta"
TEST = "test"
SPLITS = (TRAIN, META, TEST)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Features, clean labels, optional noisy labels and a split tag per row.

    When ``noisy_labels`` is present, meta and test rows carry their clean
    label in it: only the training split is ever corrupted.
    """
    features: np.ndarray = field(repr=False)
    clean_labels: np.ndarray = field(repr=False)
    split: np.ndarray = field(repr=False)
    num_classes: int
    noisy_labels: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        features = as_matrix(self.features, "features")
        clean = np.asarray(self.clean_labels, dtype=np.int64).reshape(-1)
        split = np.asarray(self.split, dtype=str).reshape(-1)
        rows = features.shape[0]
        if clean.shape[0] != rows or split.shape[0] != rows:
            raise ShapeError(
                f"dataset columns disagree: {rows} feature rows, {clean.shape[0]} labels, "
                f"{split.shape[0]} split tags"
            )
        if self.num_classes < 2:
            raise InvalidConfigError(f"a dataset needs at least 2 classes, got {self.num_classes}")
        if clean.size and (clean.min() < 0 or clean.max() >= self.num_classes):
            raise InvalidInputError(f"clean labels out of range for {self.num_classes} classes")
        unknown = set(np.unique(split)) - set(SPLITS)
        if unknown:
            raise InvalidInputError(f"unknown split tags: {sorted(unknown)}")
        noisy = self.noisy_labels
        if noisy is not None:
            noisy = np.asarray(noisy, dtype=np.int64).reshape(-1)
            if noisy.shape[0] != rows:
                raise ShapeError(f"{noisy.shape[0]} noisy labels for {rows} rows")
            if noisy.size and (noisy.min() < 0 or noisy.max() >= self.num_classes):
                raise InvalidInputError(f"noisy labels out of range for {self.num_classes} classes")
            held_out = split != TRAIN
            if np.any(noisy[held_out] != clean[held_out]):
                raise InvalidInputError("meta and test rows must keep their clean label")
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'clean_labels', clean)
        object.__setattr__(self, 'split', split)
        object.__setattr__(self, 'noisy_labels', noisy)

    @property
    def size(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def is_corrupted(self) -> bool:
        return self.noisy_labels is not None

    def indices(self, name: str) -> np.ndarray:
        return np.flatnonzero(self.split == name)

    def count(self, name: str) -> int:
        return int(np.sum(self.split == name))

    def has_split(self, name: str) -> bool:
        return self.count(name) > 0

    def require_split(self, name: str, purpose: str = "this method") -> np.ndarray:
        """Row indices of a split, raising InvalidConfigError when it is empty."""
        idx = self.indices(name)
        if idx.size == 0:
            raise InvalidConfigError(f"{purpose} needs a non-empty {name} split")
        return idx

    def training_labels(self) -> np.ndarray:
        """Labels the learner sees: noisy when corrupted, clean otherwise."""
        return self.clean_labels if self.noisy_labels is None else self.noisy_labels

    def split_arrays(self, name: str, noisy: bool = False) -> Tuple[np.ndarray, np.ndarray]:
        """(features, labels) of one split."""
        idx = self.indices(name)
        labels = self.training_labels() if noisy else self.clean_labels
        return self.features[idx], labels[idx]

    def with_noisy_labels(self, noisy_labels: Optional[np.ndarray]) -> "LabeledDataset":
        return replace(self, noisy_labels=noisy_labels)

    def same_as(self, other: "LabeledDataset") -> bool:
        """Exact equality on every field."""
        if self.num_classes != other.num_classes or self.is_corrupted != other.is_corrupted:
            return False
        same = (np.array_equal(self.features, other.features)
                and np.array_equal(self.clean_labels, other.clean_labels)
                and np.array_equal(self.split, other.split))
        if self.is_corrupted:
            same = same and np.array_equal(self.noisy_labels, other.noisy_labels)
        return same


def _per_class_quota(count: int, num_classes: int) -> np.ndarray:
    quota = np.full(num_classes, count // num_classes, dtype=np.int64)
    quota[: count % num_classes] += 1
    return quota


def split_dataset(dataset: LabeledDataset, n_train: Optional[int], n_meta: int,
                  n_test: int, rng: SeededRng) -> LabeledDataset:
    """Draw disjoint class-stratified train/meta/test splits.

    Each split takes ``count // c`` rows per class, with the remainder going
    to the lowest class indices. Rows not drawn are dropped; ``n_train=None``
    assigns every row left after the meta and test draws to training.

    Raises:
        InvalidConfigError: On negative counts or when a class runs out of rows
    """
    if n_meta < 0 or n_test < 0 or (n_train is not None and n_train < 0):
        raise InvalidConfigError("split counts must be non-negative")
    c = dataset.num_classes
    by_class = [rng.permutation(idx) for idx in
                (np.flatnonzero(dataset.clean_labels == k) for k in range(c))]
    available = np.array([len(idx) for idx in by_class])
    requested = [(META, n_meta), (TEST, n_test)]
    if n_train is not None:
        requested.append((TRAIN, n_train))
    total = sum(count for _, count in requested)
    if total > dataset.size:
        raise InvalidConfigError(
            f"split counts sum to {total} but the dataset has only {dataset.size} rows"
        )

    tags = np.full(dataset.size, "", dtype="<U5")
    offsets = np.zeros(c, dtype=np.int64)
    for name, count in requested:
        quota = _per_class_quota(count, c)
        if np.any(offsets + quota > available):
            short = int(np.argmax(offsets + quota > available))
            raise InvalidConfigError(
                f"class {short} has {available[short]} rows, not enough for the {name} split"
            )
        for k in range(c):
            tags[by_class[k][offsets[k]:offsets[k] + quota[k]]] = name
        offsets += quota
    if n_train is None:
        for k in range(c):
            tags[by_class[k][offsets[k]:]] = TRAIN

    keep = np.flatnonzero(tags != "")
    noisy = None if dataset.noisy_labels is None else dataset.noisy_labels[keep]
    result = LabeledDataset(
        features=dataset.features[keep],
        clean_labels=dataset.clean_labels[keep],
        split=tags[keep],
        num_classes=c,
        noisy_labels=noisy,
    )
    logger.info("Split dataset: train=%d meta=%d test=%d",
                result.count(TRAIN), result.count(META), result.count(TEST))
    return result


def corrupt_dataset(dataset: LabeledDataset, matrix,
                    rng: SeededRng) -> Tuple[LabeledDataset, CorruptionReport]:
    """Corrupt the training split only; meta and test rows stay clean."""
    train_idx = dataset.indices(TRAIN)
    noisy_train, report = corrupt_labels(dataset.clean_labels[train_idx], matrix, rng)
    noisy = dataset.clean_labels.copy()
    noisy[train_idx] = noisy_train
    logger.info("Corrupted %d training labels (flipped fraction %.4f)",
                train_idx.size, report.flipped_fraction)
    return dataset.with_noisy_labels(noisy), report
