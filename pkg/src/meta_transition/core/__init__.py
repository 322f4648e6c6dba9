"""Dense float64 linear algebra, stable softmax/cross-entropy and seeded randomness."""

from .linalg import as_matrix, ensure_finite, matmul, transpose, axpy
from .functional import softmax, softmax_rows, cross_entropy, cross_entropy_rows, logsumexp
from .rng import SeededRng

__all__ = [
    "as_matrix",
    "ensure_finite",
    "matmul",
    "transpose",
    "axpy",
    "softmax",
    "softmax_rows",
    "cross_entropy",
    "cross_entropy_rows",
    "logsumexp",
    "SeededRng",
]
