"""Transition estimates from a classifier trained on noisy labels."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from ..core.linalg import as_matrix
from ..errors import CoverageError, InvalidConfigError, ShapeError
from ..model.classifier import MlpParams, forward

logger = logging.getLogger(__name__)

PROVENANCES = ("forward-anchor", "glc", "smodel", "oracle")


@dataclass(frozen=True, eq=False)
class EstimatorOutput:
    """An estimated transition matrix and where it came from."""
    matrix: np.ndarray
    provenance: str
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise InvalidConfigError(f"unknown provenance '{self.provenance}'")
        object.__setattr__(self, 'matrix', as_matrix(self.matrix, "estimate"))


def _renormalize(rows: np.ndarray) -> np.ndarray:
    return rows / rows.sum(axis=1, keepdims=True)


def estimate_forward(params_ce: MlpParams, train_features) -> EstimatorOutput:
    """Anchor estimate: row ``i`` is the noisy posterior at ``argmax_x p(noisy=i | x)``.

    Ties between samples go to the lowest sample index.

    Raises:
        InvalidConfigError: If there are no training features
    """
    x = as_matrix(train_features, "train features")
    if x.shape[0] == 0:
        raise InvalidConfigError("forward estimation needs a non-empty training split")
    probs = forward(params_ce, x).probs
    anchors = np.argmax(probs, axis=0)
    matrix = _renormalize(probs[anchors])
    logger.debug("Forward anchors: %s", anchors.tolist())
    return EstimatorOutput(matrix, "forward-anchor", {'anchors': anchors.tolist()})


def estimate_glc(params_ce: MlpParams, meta_features, meta_labels) -> EstimatorOutput:
    """Row ``i`` is the mean noisy posterior over clean meta samples of class ``i``.

    Raises:
        CoverageError: If some class has no meta samples
    """
    x = as_matrix(meta_features, "meta features")
    y = np.asarray(meta_labels, dtype=np.int64).reshape(-1)
    if y.shape[0] != x.shape[0]:
        raise ShapeError(f"{y.shape[0]} meta labels for {x.shape[0]} rows")
    c = params_ce.num_classes
    counts = np.bincount(y, minlength=c) if y.size else np.zeros(c, dtype=np.int64)
    if counts.size > c:
        raise ShapeError(f"meta labels exceed the {c} network classes")
    for k in range(c):
        if counts[k] == 0:
            raise CoverageError(k)
    probs = forward(params_ce, x).probs
    sums = np.zeros((c, c))
    np.add.at(sums, y, probs)
    matrix = _renormalize(sums / counts[:, None])
    return EstimatorOutput(matrix, "glc", {'class_counts': counts.tolist()})
