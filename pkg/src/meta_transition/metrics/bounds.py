"""Closed-form Rademacher generalization bound for depth-d ReLU networks.

    2 c M B (sqrt(2 ln2 d) + 1) prod(M_i) / sqrt(N) + 3 M sqrt(ln(2/δ) / (2N))

``B`` bounds the input norm, ``M_i`` the Frobenius norm of layer ``i``,
``M`` the loss range, ``N`` is the training size and ``c`` the class count.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core.functional import DEFAULT_EPS
from ..core.linalg import as_matrix
from ..errors import InvalidConfigError
from ..model.classifier import MlpParams


@dataclass(frozen=True)
class BoundInputs:
    input_norm: float
    layer_norms: Tuple[float, ...]
    n_train: int
    num_classes: int
    loss_bound: float
    delta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, 'layer_norms', tuple(float(m) for m in self.layer_norms))
        if not 0.0 < self.delta < 1.0:
            raise InvalidConfigError(f"delta must be in (0, 1), got {self.delta}")
        if not self.layer_norms:
            raise InvalidConfigError("at least one layer norm is required")
        if any(m < 0 or not math.isfinite(m) for m in self.layer_norms):
            raise InvalidConfigError(f"layer norms must be finite and >= 0, got {self.layer_norms}")
        if not self.input_norm > 0 or not self.loss_bound > 0:
            raise InvalidConfigError("input norm and loss bound must be positive")
        if self.n_train < 1 or self.num_classes < 1:
            raise InvalidConfigError("n_train and num_classes must be >= 1")

    @property
    def depth(self) -> int:
        return len(self.layer_norms)


def complexity_term(inputs: BoundInputs) -> float:
    product = float(np.prod(inputs.layer_norms))
    return (2.0 * inputs.num_classes * inputs.loss_bound * inputs.input_norm
            * (math.sqrt(2.0 * math.log(2.0) * inputs.depth) + 1.0)
            * product / math.sqrt(inputs.n_train))


def confidence_term(inputs: BoundInputs) -> float:
    return 3.0 * inputs.loss_bound * math.sqrt(
        math.log(2.0 / inputs.delta) / (2.0 * inputs.n_train))


def rademacher_bound(inputs: BoundInputs) -> float:
    """Sum of the complexity and confidence terms, natural logarithms throughout."""
    return complexity_term(inputs) + confidence_term(inputs)


def frobenius_norms(params: MlpParams, features=None) -> Tuple[List[float], Optional[float]]:
    """Per-layer Frobenius norms and, given features, the largest row norm ``B``."""
    norms = [float(np.linalg.norm(w)) for w in params.weights]
    if features is None:
        return norms, None
    x = as_matrix(features, "features")
    input_norm = float(np.max(np.linalg.norm(x, axis=1))) if x.shape[0] else 0.0
    return norms, input_norm


def loss_bound_for(eps: float = DEFAULT_EPS) -> float:
    """Range of the eps-clamped cross-entropy, ``-log(eps)``."""
    if not 0.0 < eps < 1.0:
        raise InvalidConfigError(f"eps must be in (0, 1), got {eps}")
    return -math.log(eps)


def bound_inputs_for(params: MlpParams, features, n_train: int, delta: float = 0.05,
                     eps: float = DEFAULT_EPS) -> BoundInputs:
    """BoundInputs measured from a trained network and its training features."""
    norms, input_norm = frobenius_norms(params, features)
    return BoundInputs(
        input_norm=input_norm,
        layer_norms=tuple(norms),
        n_train=n_train,
        num_classes=params.num_classes,
        loss_bound=loss_bound_for(eps),
        delta=delta,
    )
