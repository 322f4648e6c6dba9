"""Fully connected ReLU network with softmax output and analytic derivatives.

Layer ``i`` holds a weight matrix ``W_i`` of shape ``(d_i, d_{i-1})`` and no
bias. Hidden layers compute ``relu(z @ W_i.T)``; the last layer is linear and
followed by a row-wise softmax. Parameters are immutable values; every update
returns a new :class:`MlpParams`.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from ..core.functional import softmax_rows
from ..core.linalg import as_matrix
from ..core.rng import SeededRng
from ..errors import InvalidConfigError, InvalidInputError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MlpConfig:
    """Architecture settings: hidden widths and uniform init scale."""
    hidden_dims: Tuple[int, ...] = (32, 32)
    init_scale: float = 0.3

    def layer_dims(self, input_dim: int, num_classes: int) -> Tuple[int, ...]:
        return (int(input_dim),) + tuple(int(d) for d in self.hidden_dims) + (int(num_classes),)


@dataclass(frozen=True, eq=False)
class MlpParams:
    """Per-layer weight matrices of a depth-d network."""
    layer_dims: Tuple[int, ...]
    weights: Tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.layer_dims)
        if len(dims) < 2:
            raise InvalidConfigError("an MLP needs at least an input and an output dimension")
        if len(self.weights) != len(dims) - 1:
            raise ShapeError(
                f"{len(dims) - 1} weight matrices expected, got {len(self.weights)}"
            )
        weights = []
        for i, w in enumerate(self.weights):
            w = np.ascontiguousarray(w, dtype=np.float64)
            if w.shape != (dims[i + 1], dims[i]):
                raise ShapeError(
                    f"layer {i + 1} weight has shape {w.shape}, "
                    f"expected {(dims[i + 1], dims[i])}"
                )
            weights.append(w)
        object.__setattr__(self, 'layer_dims', dims)
        object.__setattr__(self, 'weights', tuple(weights))

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def num_classes(self) -> int:
        return self.layer_dims[-1]

    def with_weights(self, weights: Sequence[np.ndarray]) -> "MlpParams":
        return MlpParams(self.layer_dims, tuple(weights))

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(w))) for w in self.weights)

    def allclose(self, other: "MlpParams", atol: float = 0.0) -> bool:
        """True when both networks have the same dims and weights within ``atol``."""
        if self.layer_dims != other.layer_dims:
            return False
        return all(np.allclose(a, b, rtol=0.0, atol=atol)
                   for a, b in zip(self.weights, other.weights))


@dataclass(frozen=True, eq=False)
class ForwardCache:
    """Intermediate values of one forward pass.

    ``activations[i]`` is the input to layer ``i + 1`` (``activations[0]`` is
    the feature batch) and ``pre_activations[i]`` its output before the
    nonlinearity. The last pre-activation is the logit matrix.
    """
    activations: Tuple[np.ndarray, ...]
    pre_activations: Tuple[np.ndarray, ...]
    probs: np.ndarray = field(repr=False)

    @property
    def logits(self) -> np.ndarray:
        return self.pre_activations[-1]

    @property
    def batch_size(self) -> int:
        return self.activations[0].shape[0]


def init_mlp(layer_dims: Sequence[int], scale: float, rng: SeededRng) -> MlpParams:
    """Draw weights i.i.d. uniform in ``[-scale, scale]``.

    Args:
        layer_dims: ``[d0, ..., c]``
        scale: Half-width of the uniform distribution; 0 gives zero weights
        rng: Random stream, consumed layer by layer

    Raises:
        InvalidConfigError: For fewer than two dims, a non-positive dim or a
            negative scale
    """
    dims = [int(d) for d in layer_dims]
    if len(dims) < 2:
        raise InvalidConfigError(f"layer_dims needs at least 2 entries, got {dims}")
    if any(d < 1 for d in dims):
        raise InvalidConfigError(f"layer dims must be positive, got {dims}")
    if scale < 0 or not np.isfinite(scale):
        raise InvalidConfigError(f"init scale must be >= 0, got {scale}")
    weights = [rng.uniform(-scale, scale, (dims[i + 1], dims[i]))
               for i in range(len(dims) - 1)]
    logger.debug("Initialized MLP %s with scale %s from %r", dims, scale, rng)
    return MlpParams(tuple(dims), tuple(weights))


def forward(params: MlpParams, features) -> ForwardCache:
    """Run the network on a batch.

    Args:
        params: Network weights
        features: ``(batch, d0)`` matrix

    Returns:
        ForwardCache with row-stochastic ``probs``

    Raises:
        ShapeError: If the feature width differs from ``d0``
    """
    z = as_matrix(features, "features")
    if z.shape[1] != params.input_dim:
        raise ShapeError(
            f"features have {z.shape[1]} columns, network expects {params.input_dim}"
        )
    activations = [z]
    pre_activations = []
    last = params.depth - 1
    for i, w in enumerate(params.weights):
        a = z @ w.T
        pre_activations.append(a)
        if i < last:
            z = np.maximum(a, 0.0)
            activations.append(z)
    probs = softmax_rows(pre_activations[-1])
    return ForwardCache(tuple(activations), tuple(pre_activations), probs)


def _check_cache(params: MlpParams, cache: ForwardCache) -> None:
    if len(cache.pre_activations) != params.depth:
        raise ShapeError("forward cache does not match network depth")
    for i, (z, w) in enumerate(zip(cache.activations, params.weights)):
        if z.shape[1] != w.shape[1] or cache.pre_activations[i].shape[1] != w.shape[0]:
            raise ShapeError(f"forward cache is stale at layer {i + 1}")


def backward_from_logits(params: MlpParams, cache: ForwardCache,
                         dlogits) -> List[np.ndarray]:
    """Backpropagate per-sample logit gradients to the weights.

    Args:
        params: Weights the cache was computed with
        cache: Output of :func:`forward`
        dlogits: ``(batch, c)`` rows holding dl_i/dh_i for each sample

    Returns:
        Gradients of the batch-mean loss, one per layer

    Raises:
        ShapeError: On a stale cache or a mis-shaped upstream gradient
    """
    _check_cache(params, cache)
    delta = np.asarray(dlogits, dtype=np.float64)
    if delta.shape != cache.logits.shape:
        raise ShapeError(f"upstream gradient {delta.shape} does not match logits {cache.logits.shape}")
    batch = cache.batch_size
    grads: List[np.ndarray] = [np.empty(0)] * params.depth
    for i in range(params.depth - 1, -1, -1):
        grads[i] = delta.T @ cache.activations[i] / batch
        if i > 0:
            # ReLU subgradient at 0 is 0
            delta = (delta @ params.weights[i]) * (cache.pre_activations[i - 1] > 0)
    return grads


def backward(params: MlpParams, cache: ForwardCache, dloss_dprobs) -> List[np.ndarray]:
    """Gradients of the batch-mean loss given per-sample dl_i/df_i rows.

    The upstream rows are chained through the softmax Jacobian
    ``diag(f) - f f^T`` and then through the layers.
    """
    g = np.asarray(dloss_dprobs, dtype=np.float64)
    f = cache.probs
    if g.shape != f.shape:
        raise ShapeError(f"upstream gradient {g.shape} does not match probabilities {f.shape}")
    dlogits = f * (g - np.sum(g * f, axis=1, keepdims=True))
    return backward_from_logits(params, cache, dlogits)


def forward_tangent(params: MlpParams, cache: ForwardCache,
                    direction: Sequence[np.ndarray]) -> np.ndarray:
    """Directional derivative of the logits along a weight direction.

    Returns the ``(batch, c)`` matrix ``d/dr h(x; W + r V)`` at ``r = 0``,
    holding the ReLU masks fixed at the cached activation pattern.
    """
    _check_cache(params, cache)
    if len(direction) != params.depth:
        raise ShapeError("direction must have one matrix per layer")
    z_dot = np.zeros_like(cache.activations[0])
    a_dot = z_dot
    last = params.depth - 1
    for i, (w, v) in enumerate(zip(params.weights, direction)):
        v = np.asarray(v, dtype=np.float64)
        if v.shape != w.shape:
            raise ShapeError(f"direction layer {i + 1} has shape {v.shape}, expected {w.shape}")
        a_dot = z_dot @ w.T + cache.activations[i] @ v.T
        if i < last:
            z_dot = a_dot * (cache.pre_activations[i] > 0)
    return a_dot


def sgd_step(params: MlpParams, grads: Sequence[np.ndarray], lr: float) -> MlpParams:
    """Return ``W - lr * grad`` for every layer.

    Raises:
        InvalidInputError: If ``lr`` is negative
        ShapeError: If a gradient does not match its layer
    """
    if lr < 0:
        raise InvalidInputError(f"learning rate must be >= 0, got {lr}")
    if len(grads) != params.depth:
        raise ShapeError(f"{params.depth} gradients expected, got {len(grads)}")
    updated = []
    for w, g in zip(params.weights, grads):
        g = np.asarray(g, dtype=np.float64)
        if g.shape != w.shape:
            raise ShapeError(f"gradient shape {g.shape} does not match weight {w.shape}")
        updated.append(w - lr * g)
    return params.with_weights(updated)


def predict(params: MlpParams, features) -> np.ndarray:
    """Predicted class per row; ties go to the lowest class index."""
    return np.argmax(forward(params, features).probs, axis=1)


def parameter_norm(tensors: Sequence[np.ndarray]) -> float:
    """Euclidean norm of a list of matrices taken as one flat vector."""
    return float(np.sqrt(sum(float(np.sum(np.square(t))) for t in tensors)))
