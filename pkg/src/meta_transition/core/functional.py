"""Numerically stable softmax and cross-entropy."""

from typing import Union

import numpy as np
from scipy.special import logsumexp as _scipy_logsumexp

from ..errors import InvalidInputError, ShapeError

DEFAULT_EPS = 1e-12


def softmax(logits) -> np.ndarray:
    """Softmax of a single logit vector.

    Uses max-subtraction, so ``[1000, 1000]`` gives ``[0.5, 0.5]``.

    Raises:
        InvalidInputError: If the vector is empty or holds non-finite values
    """
    v = np.asarray(logits, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise InvalidInputError(f"softmax expects a non-empty vector, got shape {v.shape}")
    return softmax_rows(v.reshape(1, -1))[0]


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax of a 2-D array of logits."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] == 0:
        raise ShapeError(f"softmax_rows expects a 2-D array with columns, got {z.shape}")
    if not np.all(np.isfinite(z)):
        raise InvalidInputError("softmax input contains non-finite values")
    shifted = z - z.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def logsumexp(values, axis: Union[int, None] = None) -> Union[float, np.ndarray]:
    """log(sum(exp(values))) without overflow."""
    return _scipy_logsumexp(np.asarray(values, dtype=np.float64), axis=axis)


def cross_entropy(probs, label: int, eps: float = DEFAULT_EPS) -> float:
    """Cross-entropy ``-log(max(probs[label], eps))`` of one prediction.

    Args:
        probs: Probability vector
        label: Target class index
        eps: Probability floor, must be positive

    Returns:
        Non-negative finite loss

    Raises:
        InvalidInputError: If the label is out of range, eps is not positive
            or probs does not sum to one
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise InvalidInputError(f"probs must be a non-empty vector, got shape {p.shape}")
    if eps <= 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    if not 0 <= int(label) < p.size:
        raise InvalidInputError(f"label {label} out of range for {p.size} classes")
    if abs(p.sum() - 1.0) > 1e-9:
        raise InvalidInputError(f"probs must sum to 1, got {p.sum()!r}")
    return float(-np.log(max(p[int(label)], eps)))


def cross_entropy_rows(probs: np.ndarray, labels: np.ndarray,
                       eps: float = DEFAULT_EPS) -> np.ndarray:
    """Per-row cross-entropy for a batch of probability rows and labels."""
    p = np.asarray(probs, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if p.ndim != 2 or y.shape != (p.shape[0],):
        raise ShapeError(f"labels {y.shape} do not match probability batch {p.shape}")
    if y.size and (y.min() < 0 or y.max() >= p.shape[1]):
        raise InvalidInputError("label out of range")
    picked = p[np.arange(p.shape[0]), y]
    return -np.log(np.maximum(picked, eps))
