"""Row-stochastic transition matrices and their softmax-logit parametrization.

``T[i, j]`` is the probability that clean class ``i`` is observed as noisy
class ``j``, so noisy posteriors are ``q = T^T f`` (``F @ T`` for a batch).
During learning ``T`` is always the row-softmax of an unconstrained logit
matrix ``Θ``.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.functional import softmax_rows
from ..core.linalg import as_matrix
from ..errors import InvalidConfigError, InvalidInputError, ShapeError

Pair = Tuple[int, int]

NOISE_KINDS = ("symmetric", "pairs")

# truck -> automobile, bird -> airplane, deer -> horse, cat -> dog
CIFAR10_PAIRS: Tuple[Pair, ...] = ((9, 1), (2, 0), (4, 7), (3, 5))

PAIR_PRESETS = ("cifar10", "cyclic")

STOCHASTIC_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransitionState:
    """Logits ``Θ`` and the induced matrix ``T = row_softmax(Θ)``.

    Build instances with :func:`from_logits` so that ``matrix`` is always
    recomputed from ``logits``.
    """
    logits: np.ndarray = field(repr=False)
    matrix: np.ndarray

    @property
    def num_classes(self) -> int:
        return self.logits.shape[0]

    def with_logits(self, logits) -> "TransitionState":
        return from_logits(logits)


@dataclass(frozen=True)
class NoiseSpec:
    """Kind of corruption plus its rate and, for pair flips, the pairs."""
    kind: str
    rate: float
    pairs: Tuple[Pair, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in NOISE_KINDS:
            raise InvalidConfigError(
                f"unknown noise kind '{self.kind}', expected one of {', '.join(NOISE_KINDS)}"
            )
        if not 0.0 <= float(self.rate) <= 1.0:
            raise InvalidConfigError(f"noise rate must be in [0, 1], got {self.rate}")
        pairs = tuple((int(s), int(t)) for s, t in self.pairs)
        _check_pairs(pairs)
        object.__setattr__(self, 'rate', float(self.rate))
        object.__setattr__(self, 'pairs', pairs)

    def matrix(self, num_classes: int) -> np.ndarray:
        """Ground-truth transition matrix for ``num_classes`` classes."""
        if self.kind == "symmetric":
            return symmetric_matrix(num_classes, self.rate)
        return pairflip_matrix(num_classes, self.rate, self.pairs)

    def to_dict(self) -> dict:
        return {
            'kind': self.kind,
            'rate': self.rate,
            'pairs': [list(p) for p in self.pairs],
        }

    @classmethod
    def from_args(cls, kind: str, rate: float, pairs: Optional[str],
                  num_classes: int) -> "NoiseSpec":
        """Build a spec from CLI-style values.

        ``pairs`` is either a preset name (``cifar10``, ``cyclic``) or a list
        such as ``"0:1,2:3"``; it defaults to the cyclic preset for pair noise.
        """
        if kind != "pairs":
            return cls(kind, rate)
        return cls(kind, rate, resolve_pairs(pairs or "cyclic", num_classes))


def _check_pairs(pairs: Sequence[Pair], num_classes: Optional[int] = None) -> None:
    sources = set()
    for source, target in pairs:
        if source == target:
            raise InvalidConfigError(f"pair {source}->{target} maps a class to itself")
        if source in sources:
            raise InvalidConfigError(f"duplicate pair source {source}")
        if min(source, target) < 0 or (
                num_classes is not None and max(source, target) >= num_classes):
            raise InvalidConfigError(
                f"pair {source}->{target} out of range for {num_classes} classes"
            )
        sources.add(source)


def parse_pairs(text: str) -> List[Pair]:
    """Parse ``"0:1,2:3"`` into ``[(0, 1), (2, 3)]``.

    Raises:
        InvalidConfigError: On malformed entries
    """
    pairs = []
    for chunk in text.split(','):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(':')
        if len(parts) != 2:
            raise InvalidConfigError(f"malformed pair '{chunk}', expected SOURCE:TARGET")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise InvalidConfigError(f"malformed pair '{chunk}', class indices must be integers")
    if not pairs:
        raise InvalidConfigError("pair list is empty")
    return pairs


def cyclic_pairs(num_classes: int) -> List[Pair]:
    """Every class ``i`` flips to ``(i + 1) mod c``."""
    return [(i, (i + 1) % num_classes) for i in range(num_classes)]


def resolve_pairs(value, num_classes: int) -> Tuple[Pair, ...]:
    """Turn a preset name, a pair string or a pair list into validated pairs."""
    if isinstance(value, str):
        name = value.strip().lower()
        if name == "cifar10":
            if num_classes != 10:
                raise InvalidConfigError("the cifar10 pair preset needs exactly 10 classes")
            pairs: Iterable[Pair] = CIFAR10_PAIRS
        elif name == "cyclic":
            pairs = cyclic_pairs(num_classes)
        else:
            pairs = parse_pairs(value)
    else:
        pairs = [(int(s), int(t)) for s, t in value]
    pairs = tuple(pairs)
    _check_pairs(pairs, num_classes)
    return pairs


def symmetric_matrix(num_classes: int, eta: float) -> np.ndarray:
    """``1 - eta`` on the diagonal, ``eta / (c - 1)`` elsewhere.

    Raises:
        InvalidConfigError: If ``c < 2`` or ``eta`` is outside [0, 1]
    """
    if num_classes < 2:
        raise InvalidConfigError(f"symmetric noise needs at least 2 classes, got {num_classes}")
    if not 0.0 <= eta <= 1.0:
        raise InvalidConfigError(f"eta must be in [0, 1], got {eta}")
    matrix = np.full((num_classes, num_classes), eta / (num_classes - 1))
    np.fill_diagonal(matrix, 1.0 - eta)
    return matrix


def pairflip_matrix(num_classes: int, rate: float, pairs: Sequence[Pair]) -> np.ndarray:
    """Identity except that each pair source ``i -> j`` keeps ``1 - r`` and sends ``r`` to ``j``.

    Raises:
        InvalidConfigError: On a rate outside [0, 1] or invalid pairs
    """
    if not 0.0 <= rate <= 1.0:
        raise InvalidConfigError(f"pair-flip rate must be in [0, 1], got {rate}")
    pairs = [(int(s), int(t)) for s, t in pairs]
    _check_pairs(pairs, num_classes)
    matrix = np.eye(num_classes)
    for source, target in pairs:
        matrix[source, source] = 1.0 - rate
        matrix[source, target] = rate
    return matrix


def check_row_stochastic(matrix: np.ndarray, tol: float = STOCHASTIC_TOL,
                         name: str = "transition matrix") -> np.ndarray:
    """Validate a square, non-negative matrix whose rows sum to one.

    Raises:
        ShapeError: If the matrix is not square
        InvalidInputError: On negative entries or rows not summing to one
    """
    m = as_matrix(matrix, name)
    if m.shape[0] != m.shape[1]:
        raise ShapeError(f"{name} must be square, got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{name} contains non-finite values")
    if np.any(m < 0):
        raise InvalidInputError(f"{name} has negative entries")
    row_sums = m.sum(axis=1)
    if np.max(np.abs(row_sums - 1.0)) > tol:
        raise InvalidInputError(f"{name} rows must sum to 1, got {row_sums.tolist()}")
    return m


def from_logits(theta) -> TransitionState:
    """Row-softmax of ``Θ``.

    Raises:
        ShapeError: If ``Θ`` is not square
        InvalidInputError: If ``Θ`` has non-finite entries
    """
    logits = as_matrix(theta, "transition logits").copy()
    if logits.shape[0] != logits.shape[1]:
        raise ShapeError(f"transition logits must be square, got {logits.shape}")
    return TransitionState(logits=logits, matrix=softmax_rows(logits))


def logits_from_estimate(estimate, eps: float = 1e-8) -> np.ndarray:
    """``Θ = log(T_hat + eps)``, the inverse of :func:`from_logits` up to ``eps``.

    Raises:
        InvalidInputError: On negative entries, rows not summing to one
            (within 1e-6) or a non-positive ``eps``
    """
    if eps <= 0:
        raise InvalidInputError(f"eps must be positive, got {eps}")
    matrix = check_row_stochastic(estimate, tol=1e-6, name="transition estimate")
    return np.log(matrix + eps)


def apply(matrix, posteriors) -> np.ndarray:
    """Map clean posteriors to noisy ones: each row ``f`` becomes ``T^T f``.

    Raises:
        ShapeError: If the class counts differ
    """
    t = as_matrix(matrix, "transition matrix")
    f = as_matrix(posteriors, "posteriors")
    if t.shape[0] != t.shape[1]:
        raise ShapeError(f"transition matrix must be square, got {t.shape}")
    if f.shape[1] != t.shape[0]:
        raise ShapeError(f"posteriors have {f.shape[1]} classes, matrix has {t.shape[0]}")
    return f @ t


def grad_wrt_logits(state: TransitionState, dloss_dmatrix) -> np.ndarray:
    """Chain ``dL/dT`` through the row softmax to ``dL/dΘ``.

    Per row ``k``: ``dL/dΘ[k, l] = T[k, l] * (dL/dT[k, l] - sum_j dL/dT[k, j] T[k, j])``.
    """
    g = np.asarray(dloss_dmatrix, dtype=np.float64)
    t = state.matrix
    if g.shape != t.shape:
        raise ShapeError(f"gradient shape {g.shape} does not match transition {t.shape}")
    return t * (g - np.sum(g * t, axis=1, keepdims=True))
