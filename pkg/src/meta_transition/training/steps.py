"""Losses and gradients of the clean and transition-corrected objectives."""

from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from ..core.functional import DEFAULT_EPS, cross_entropy_rows
from ..core.linalg import as_matrix
from ..errors import DivergenceError, InvalidInputError, ShapeError
from ..model.classifier import (
    ForwardCache,
    MlpParams,
    backward_from_logits,
    forward,
    sgd_step,
)
from ..noise.transition import TransitionState


@dataclass(frozen=True, eq=False)
class Batch:
    """A feature matrix with one label per row."""
    features: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        features = as_matrix(self.features, "batch features")
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if features.shape[0] == 0:
            raise InvalidInputError("batch is empty")
        if labels.shape[0] != features.shape[0]:
            raise ShapeError(f"{labels.shape[0]} labels for {features.shape[0]} rows")
        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'labels', labels)

    @property
    def size(self) -> int:
        return self.features.shape[0]

    @classmethod
    def take(cls, features: np.ndarray, labels: np.ndarray, indices) -> "Batch":
        return cls(features[indices], labels[indices])


@dataclass(frozen=True, eq=False)
class NoisyLossResult:
    """Loss of ``T^T f`` against noisy labels and both gradient blocks."""
    loss: float
    weight_grads: List[np.ndarray] = field(repr=False)
    transition_grad: np.ndarray = field(repr=False)
    cache: ForwardCache = field(repr=False)


def _one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise InvalidInputError(f"labels out of range for {num_classes} classes")
    return np.eye(num_classes)[labels]


def clean_loss_and_grads(params: MlpParams, batch: Batch,
                         eps: float = DEFAULT_EPS) -> Tuple[float, List[np.ndarray], ForwardCache]:
    """Mean cross-entropy of ``f`` itself and its weight gradients."""
    cache = forward(params, batch.features)
    losses = cross_entropy_rows(cache.probs, batch.labels, eps)
    dlogits = cache.probs - _one_hot(batch.labels, params.num_classes)
    return float(np.mean(losses)), backward_from_logits(params, cache, dlogits), cache


def noisy_posterior_terms(probs: np.ndarray, matrix: np.ndarray,
                          labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-row ``T[:, y_i]`` and ``q_i = (T^T f_i)[y_i]``."""
    columns = matrix.T[labels]
    return columns, np.sum(probs * columns, axis=1)


def noisy_loss_and_grads(params: MlpParams, state: TransitionState, batch: Batch,
                         eps: float = DEFAULT_EPS) -> NoisyLossResult:
    """Transition-corrected loss ``mean(-log (T^T f_i)[y_i])`` and its gradients.

    Args:
        params: Classifier weights
        state: Current transition
        batch: Features with noisy labels
        eps: Probability floor; rows whose ``q`` falls below it contribute a
            constant loss and no gradient

    Returns:
        NoisyLossResult with ``dL/dW`` per layer and ``dL/dT``

    Raises:
        ShapeError: If the transition and network class counts differ
    """
    c = params.num_classes
    if state.matrix.shape != (c, c):
        raise ShapeError(f"transition is {state.matrix.shape}, network has {c} classes")
    onehot = _one_hot(batch.labels, c)
    cache = forward(params, batch.features)
    f = cache.probs
    columns, q = noisy_posterior_terms(f, state.matrix, batch.labels)
    active = q >= eps
    safe_q = np.where(active, q, 1.0)
    loss = float(np.mean(-np.log(np.maximum(q, eps))))

    # dl/dh = f - f * T[:, y] / q, the softmax chain of dl/df = -T[:, y] / q
    dlogits = np.where(active[:, None], f - f * columns / safe_q[:, None], 0.0)
    weight_grads = backward_from_logits(params, cache, dlogits)

    per_sample = np.where(active[:, None], -f / safe_q[:, None], 0.0) / batch.size
    transition_grad = per_sample.T @ onehot
    return NoisyLossResult(loss, weight_grads, transition_grad, cache)


def _classifier_update(params: MlpParams, state: TransitionState, batch: Batch,
                       alpha: float, eps: float = DEFAULT_EPS
                       ) -> Tuple[MlpParams, NoisyLossResult]:
    """One SGD step on the noisy loss; returns the new weights and the pre-step loss terms."""
    result = noisy_loss_and_grads(params, state, batch, eps)
    return sgd_step(params, result.weight_grads, alpha), result


def classifier_step(params: MlpParams, state: TransitionState, batch: Batch,
                    alpha: float, eps: float = DEFAULT_EPS) -> MlpParams:
    """``W - alpha * dL/dW`` at the current transition."""
    if alpha < 0:
        raise InvalidInputError(f"alpha must be >= 0, got {alpha}")
    return _classifier_update(params, state, batch, alpha, eps)[0]


def guard_loss(loss: float, iteration: int, threshold: float = 1e6,
               what: str = "loss") -> float:
    """Raise DivergenceError when a loss is non-finite or above ``threshold``."""
    if not np.isfinite(loss) or loss > threshold:
        raise DivergenceError(iteration, loss, what)
    return loss
