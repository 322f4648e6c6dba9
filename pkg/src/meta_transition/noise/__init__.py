"""Transition matrices and label corruption."""

from .transition import (
    CIFAR10_PAIRS,
    NoiseSpec,
    TransitionState,
    apply,
    check_row_stochastic,
    cyclic_pairs,
    from_logits,
    grad_wrt_logits,
    logits_from_estimate,
    pairflip_matrix,
    parse_pairs,
    resolve_pairs,
    symmetric_matrix,
)
from .corruption import CorruptionReport, corrupt_labels, empirical_transition

__all__ = [
    "CIFAR10_PAIRS",
    "NoiseSpec",
    "TransitionState",
    "apply",
    "check_row_stochastic",
    "cyclic_pairs",
    "from_logits",
    "grad_wrt_logits",
    "logits_from_estimate",
    "pairflip_matrix",
    "parse_pairs",
    "resolve_pairs",
    "symmetric_matrix",
    "CorruptionReport",
    "corrupt_labels",
    "empirical_transition",
]
