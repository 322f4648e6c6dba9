"""Accuracy and transition estimation error."""

import numpy as np

from ..errors import InvalidInputError, ShapeError


def accuracy(predictions, labels) -> float:
    """Fraction of exact matches.

    Raises:
        InvalidInputError: On empty or unequal-length inputs
    """
    p = np.asarray(predictions).reshape(-1)
    y = np.asarray(labels).reshape(-1)
    if p.shape != y.shape:
        raise InvalidInputError(f"{p.size} predictions for {y.size} labels")
    if p.size == 0:
        raise InvalidInputError("accuracy of an empty prediction set is undefined")
    return float(np.mean(p == y))


def estimation_error(truth, estimate) -> float:
    """``sum|T - T_hat| / sum|T|``.

    Raises:
        ShapeError: If the matrices differ in shape
        InvalidInputError: If ``T`` is all zeros
    """
    t = np.asarray(truth, dtype=np.float64)
    t_hat = np.asarray(estimate, dtype=np.float64)
    if t.shape != t_hat.shape:
        raise ShapeError(f"cannot compare {t.shape} with {t_hat.shape}")
    denominator = np.sum(np.abs(t))
    if denominator <= 0:
        raise InvalidInputError("reference matrix has zero norm")
    return float(np.sum(np.abs(t - t_hat)) / denominator)
