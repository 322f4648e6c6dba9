"""Shape-checked dense matrix operations on float64 numpy arrays.

Every vector and matrix in the package is a C-contiguous ``np.float64``
array. These helpers add the shape and finiteness contracts on top of numpy.
"""

import numpy as np

from ..errors import InvalidInputError, ShapeError


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Return ``values`` as a 2-D C-contiguous float64 array.

    Args:
        values: Array-like with one or two dimensions (1-D becomes a row)
        name: Label used in error messages

    Returns:
        2-D float64 array

    Raises:
        ShapeError: If the input has more than two dimensions
    """
    array = np.ascontiguousarray(values, dtype=np.float64)
    if array.ndim == 1:
        array = array.reshape(1, -1)
    if array.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {array.shape}")
    return array


def ensure_finite(array: np.ndarray, name: str = "array") -> np.ndarray:
    """Raise InvalidInputError when ``array`` holds NaN or Inf."""
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return array


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product ``a @ b`` with a conformability check."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def transpose(a: np.ndarray) -> np.ndarray:
    """Contiguous transpose of a 2-D array."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"transpose expects a 2-D array, got shape {a.shape}")
    return np.ascontiguousarray(a.T)


def axpy(alpha: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Return ``alpha * x + y`` as a new array."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(f"axpy shape mismatch: {x.shape} vs {y.shape}")
    return alpha * x + y
