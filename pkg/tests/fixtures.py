"""Small synthetic datasets shared by the training tests."""

import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from meta_transition.core import SeededRng
from meta_transition.data import MixtureSpec, corrupt_dataset, generate_mixture, split_dataset
from meta_transition.noise import symmetric_matrix


def small_dataset(seed=0, num_classes=3, per_class=80, n_meta=30, n_test=60,
                  radius=2.5, std=1.0):
    """Clean three-way split of a circle mixture; training takes the remaining rows."""
    rng = SeededRng(seed)
    spec = MixtureSpec.on_circle(num_classes, dim=2, radius=radius, std=std, per_class=per_class)
    full = generate_mixture(spec, rng.spawn("data"))
    return split_dataset(full, None, n_meta, n_test, rng.spawn("split"))


def noisy_dataset(seed=0, rate=0.4, **kwargs):
    """``small_dataset`` with symmetric noise on the training split.

    Returns:
        (dataset, ground-truth transition)
    """
    dataset = small_dataset(seed, **kwargs)
    truth = symmetric_matrix(dataset.num_classes, rate)
    noisy, _ = corrupt_dataset(dataset, truth, SeededRng(seed).spawn("noise"))
    return noisy, truth
