"""Bias-free ReLU classifier with a softmax head."""

from .classifier import (
    MlpConfig,
    MlpParams,
    ForwardCache,
    init_mlp,
    forward,
    backward,
    backward_from_logits,
    forward_tangent,
    sgd_step,
    predict,
    parameter_norm,
)

__all__ = [
    "MlpConfig",
    "MlpParams",
    "ForwardCache",
    "init_mlp",
    "forward",
    "backward",
    "backward_from_logits",
    "forward_tangent",
    "sgd_step",
    "predict",
    "parameter_norm",
]
