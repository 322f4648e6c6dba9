"""Isotropic Gaussian mixtures with a closed-form Bayes posterior."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from ..core.functional import softmax_rows
from ..core.linalg import as_matrix
from ..core.rng import SeededRng
from ..errors import InvalidConfigError, ShapeError
from .dataset import TRAIN, LabeledDataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """One isotropic Gaussian per class with equal priors."""
    means: np.ndarray = field(repr=False)
    std: float
    per_class: int

    def __post_init__(self) -> None:
        means = as_matrix(self.means, "class means")
        if means.shape[0] < 2:
            raise InvalidConfigError("a mixture needs at least 2 classes")
        if not np.all(np.isfinite(means)):
            raise InvalidConfigError("class means must be finite")
        if len({tuple(row) for row in means.tolist()}) != means.shape[0]:
            raise InvalidConfigError("class means must be distinct")
        if not self.std > 0:
            raise InvalidConfigError(f"std must be positive, got {self.std}")
        if self.per_class < 1:
            raise InvalidConfigError(f"per_class must be >= 1, got {self.per_class}")
        object.__setattr__(self, 'means', means)
        object.__setattr__(self, 'std', float(self.std))
        object.__setattr__(self, 'per_class', int(self.per_class))

    @property
    def num_classes(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @classmethod
    def on_circle(cls, num_classes: int, dim: int = 2, radius: float = 2.5,
                  std: float = 1.0, per_class: int = 3020) -> "MixtureSpec":
        """Means evenly spaced on a circle in the first two coordinates."""
        if num_classes < 2:
            raise InvalidConfigError(f"classes must be >= 2, got {num_classes}")
        if dim < 2:
            raise InvalidConfigError(f"dim must be >= 2 for circle means, got {dim}")
        angles = 2.0 * np.pi * np.arange(num_classes) / num_classes
        means = np.zeros((num_classes, dim))
        means[:, 0] = radius * np.cos(angles)
        means[:, 1] = radius * np.sin(angles)
        return cls(means=means, std=std, per_class=per_class)

    def to_dict(self) -> dict:
        return {
            'means': self.means.tolist(),
            'std': self.std,
            'per_class': self.per_class,
        }


def reference_spec(per_class: int = 3020) -> MixtureSpec:
    """Three classes in 2-D, means 120 degrees apart at radius 2.5, std 1."""
    return MixtureSpec.on_circle(3, dim=2, radius=2.5, std=1.0, per_class=per_class)


def generate_mixture(spec: MixtureSpec, rng: SeededRng) -> LabeledDataset:
    """Draw ``per_class`` points per class; every row is tagged as training.

    Rows are grouped by class in class order. Use
    :func:`~meta_transition.data.dataset.split_dataset` to carve out the
    meta and test splits.
    """
    c, per_class = spec.num_classes, spec.per_class
    noise = rng.normal(0.0, spec.std, (c * per_class, spec.dim))
    labels = np.repeat(np.arange(c), per_class)
    features = spec.means[labels] + noise
    logger.debug("Generated %d samples for %d classes", labels.size, c)
    return LabeledDataset(
        features=features,
        clean_labels=labels,
        split=np.full(labels.size, TRAIN),
        num_classes=c,
    )


def bayes_posterior(spec: MixtureSpec, features) -> np.ndarray:
    """Exact ``p(Y | x)`` under the mixture."""
    x = as_matrix(features, "features")
    if x.shape[1] != spec.dim:
        raise ShapeError(f"features have {x.shape[1]} columns, mixture has dim {spec.dim}")
    sq_dist = np.sum((x[:, None, :] - spec.means[None, :, :]) ** 2, axis=2)
    return softmax_rows(-sq_dist / (2.0 * spec.std ** 2))


def bayes_predict(spec: MixtureSpec, features) -> np.ndarray:
    return np.argmax(bayes_posterior(spec, features), axis=1)


def bayes_accuracy_two_class(spec: MixtureSpec) -> float:
    """Bayes accuracy ``Φ(‖μ1 - μ0‖ / 2σ)`` of a two-class mixture."""
    if spec.num_classes != 2:
        raise InvalidConfigError("closed-form Bayes accuracy is only defined for 2 classes")
    gap = float(np.linalg.norm(spec.means[1] - spec.means[0]))
    return float(norm.cdf(gap / (2.0 * spec.std)))
