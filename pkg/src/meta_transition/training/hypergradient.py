"""Meta gradient of the clean meta loss with respect to the transition logits.

The virtual step ``W_hat(Θ) = W - α dL_train(W, T(Θ))/dW`` makes the meta
loss ``g(Θ) = L_meta(W_hat(Θ))`` a function of ``Θ``. With ``v`` the meta
gradient at ``W_hat``,

    dg/dT = -α d/dT <dL_train(W, T)/dW, v>

and the inner product is the directional derivative of the training loss
along ``v``. It only needs the logit tangent ``h_dot`` along ``v``, which does
not depend on ``T``, so the mixed second derivative has a closed form.
"""

import logging

import numpy as np

from ..core.functional import DEFAULT_EPS
from ..errors import InvalidInputError
from ..model.classifier import MlpParams, forward_tangent, parameter_norm, sgd_step
from ..noise.transition import TransitionState, from_logits, grad_wrt_logits
from .steps import Batch, clean_loss_and_grads, noisy_loss_and_grads, noisy_posterior_terms

logger = logging.getLogger(__name__)

HYPERGRAD_MODES = ("exact", "fd-trick")
DEFAULT_FD_EPSILON = 1e-4


def virtual_update(params: MlpParams, state: TransitionState, batch: Batch,
                   alpha: float, eps: float = DEFAULT_EPS) -> MlpParams:
    """``W_hat = W - α dL_train/dW`` without committing it."""
    if alpha < 0:
        raise InvalidInputError(f"alpha must be >= 0, got {alpha}")
    result = noisy_loss_and_grads(params, state, batch, eps)
    return sgd_step(params, result.weight_grads, alpha)


def _as_state(theta) -> TransitionState:
    return theta if isinstance(theta, TransitionState) else from_logits(theta)


def meta_loss_at(theta, params: MlpParams, train_batch: Batch, meta_batch: Batch,
                 alpha: float, eps: float = DEFAULT_EPS) -> float:
    """``g(Θ)``: clean meta loss after the virtual step."""
    w_hat = virtual_update(params, _as_state(theta), train_batch, alpha, eps)
    return clean_loss_and_grads(w_hat, meta_batch, eps)[0]


def hypergradient(theta, params: MlpParams, train_batch: Batch, meta_batch: Batch,
                  alpha: float, mode: str = "exact",
                  fd_epsilon: float = DEFAULT_FD_EPSILON,
                  eps: float = DEFAULT_EPS) -> np.ndarray:
    """Gradient of the meta loss with respect to ``Θ``.

    Args:
        theta: Transition logits or a TransitionState
        params: Classifier weights before the virtual step
        train_batch: Noisy-labeled batch driving the virtual step
        meta_batch: Clean batch the meta loss is measured on
        alpha: Virtual step size; 0 gives an exact zero matrix
        mode: ``exact`` (closed-form mixed derivative) or ``fd-trick``
            (central difference of ``dL/dT`` at ``W ± r v``)
        fd_epsilon: Step scale for ``fd-trick``
        eps: Probability floor

    Returns:
        ``c x c`` gradient with respect to ``Θ``

    Raises:
        InvalidInputError: On an unknown mode or negative alpha
    """
    if mode not in HYPERGRAD_MODES:
        raise InvalidInputError(
            f"unknown hypergradient mode '{mode}', expected one of {', '.join(HYPERGRAD_MODES)}"
        )
    if alpha < 0:
        raise InvalidInputError(f"alpha must be >= 0, got {alpha}")
    state = _as_state(theta)
    c = state.num_classes
    if alpha == 0:
        return np.zeros((c, c))

    train = noisy_loss_and_grads(params, state, train_batch, eps)
    w_hat = sgd_step(params, train.weight_grads, alpha)
    _, v, _ = clean_loss_and_grads(w_hat, meta_batch, eps)

    if mode == "exact":
        dmatrix = _exact_matrix_gradient(params, state, train_batch, train.cache, v, alpha, eps)
    else:
        dmatrix = _fd_matrix_gradient(params, state, train_batch, v, alpha, fd_epsilon, eps)
    return grad_wrt_logits(state, dmatrix)


def _exact_matrix_gradient(params, state, batch, cache, v, alpha, eps) -> np.ndarray:
    f = cache.probs
    h_dot = forward_tangent(params, cache, v)
    columns, q = noisy_posterior_terms(f, state.matrix, batch.labels)
    active = q >= eps
    safe_q = np.where(active, q, 1.0)
    a = f * h_dot
    s = np.sum(a * columns, axis=1)
    # d<dL/dW, v>/dT[k, y_i] = -(a_ik / q_i - s_i f_ik / q_i^2) / n
    per_sample = -(a / safe_q[:, None] - (s / safe_q ** 2)[:, None] * f)
    per_sample = np.where(active[:, None], per_sample, 0.0) / batch.size
    onehot = np.eye(state.num_classes)[batch.labels]
    return -alpha * (per_sample.T @ onehot)


def _fd_matrix_gradient(params, state, batch, v, alpha, fd_epsilon, eps) -> np.ndarray:
    r = fd_epsilon / (parameter_norm(v) + fd_epsilon)
    plus = params.with_weights([w + r * d for w, d in zip(params.weights, v)])
    minus = params.with_weights([w - r * d for w, d in zip(params.weights, v)])
    grad_plus = noisy_loss_and_grads(plus, state, batch, eps).transition_grad
    grad_minus = noisy_loss_and_grads(minus, state, batch, eps).transition_grad
    return -alpha * (grad_plus - grad_minus) / (2.0 * r)


def meta_step(theta, params: MlpParams, train_batch: Batch, meta_batch: Batch,
              alpha: float, beta: float, mode: str = "exact",
              fd_epsilon: float = DEFAULT_FD_EPSILON,
              eps: float = DEFAULT_EPS) -> TransitionState:
    """``Θ' = Θ - β * hypergradient``; ``T'`` is recomputed from ``Θ'``."""
    if beta < 0:
        raise InvalidInputError(f"beta must be >= 0, got {beta}")
    state = _as_state(theta)
    if beta == 0:
        return state
    grad = hypergradient(state, params, train_batch, meta_batch, alpha, mode, fd_epsilon, eps)
    return from_logits(state.logits - beta * grad)
