"""Baseline trainers and transition estimators."""

from .transition_estimators import EstimatorOutput, estimate_forward, estimate_glc
from .baselines import (
    BaselineConfig,
    estimate_from_ce,
    finetune,
    train_ce,
    train_smodel,
    train_two_stage,
    train_with_fixed_transition,
)

__all__ = [
    "EstimatorOutput",
    "estimate_forward",
    "estimate_glc",
    "BaselineConfig",
    "estimate_from_ce",
    "finetune",
    "train_ce",
    "train_smodel",
    "train_two_stage",
    "train_with_fixed_transition",
]
