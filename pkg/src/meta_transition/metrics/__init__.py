"""Evaluation metrics and the closed-form generalization bound."""

from .evaluation import accuracy, estimation_error
from .bounds import (
    BoundInputs,
    bound_inputs_for,
    complexity_term,
    confidence_term,
    frobenius_norms,
    loss_bound_for,
    rademacher_bound,
)

__all__ = [
    "accuracy",
    "estimation_error",
    "BoundInputs",
    "bound_inputs_for",
    "complexity_term",
    "confidence_term",
    "frobenius_norms",
    "loss_bound_for",
    "rademacher_bound",
]
