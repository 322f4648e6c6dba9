"""Synthetic data generation, splitting and file formats."""

from .dataset import (
    META,
    SPLITS,
    TEST,
    TRAIN,
    LabeledDataset,
    corrupt_dataset,
    split_dataset,
)
from .mixture import (
    MixtureSpec,
    bayes_accuracy_two_class,
    bayes_posterior,
    bayes_predict,
    generate_mixture,
    reference_spec,
)

__all__ = [
    "META",
    "SPLITS",
    "TEST",
    "TRAIN",
    "LabeledDataset",
    "corrupt_dataset",
    "split_dataset",
    "MixtureSpec",
    "bayes_accuracy_two_class",
    "bayes_posterior",
    "bayes_predict",
    "generate_mixture",
    "reference_spec",
]
