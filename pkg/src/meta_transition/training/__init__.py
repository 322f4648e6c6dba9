"""Losses, the meta gradient and batch sampling.

The meta-adaptation loop lives in :mod:`meta_transition.training.meta_trainer`,
which builds on the estimators package and is imported from there directly.
"""

from .sampler import MiniBatchSampler
from .steps import (
    Batch,
    NoisyLossResult,
    classifier_step,
    clean_loss_and_grads,
    guard_loss,
    noisy_loss_and_grads,
)
from .trace import TRACE_HEADER, TraceEvaluator, TraceRow, TrainTrace
from .hypergradient import HYPERGRAD_MODES, hypergradient, meta_loss_at, meta_step, virtual_update

__all__ = [
    "MiniBatchSampler",
    "Batch",
    "NoisyLossResult",
    "classifier_step",
    "clean_loss_and_grads",
    "guard_loss",
    "noisy_loss_and_grads",
    "TRACE_HEADER",
    "TraceEvaluator",
    "TraceRow",
    "TrainTrace",
    "HYPERGRAD_MODES",
    "hypergradient",
    "meta_loss_at",
    "meta_step",
    "virtual_update",
]
