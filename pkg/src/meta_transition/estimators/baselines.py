"""Baseline training schemes: CE, fine-tuning, S-Model and the two-stage estimators."""

import logging
from dataclasses import dataclass, fields
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..core.functional import DEFAULT_EPS
from ..core.rng import SeededRng
from ..data.dataset import META, TRAIN, LabeledDataset
from ..errors import InvalidConfigError, ShapeError
from ..model.classifier import MlpConfig, MlpParams, init_mlp, sgd_step
from ..noise.transition import TransitionState, from_logits, grad_wrt_logits, logits_from_estimate
from ..training.sampler import MiniBatchSampler
from ..training.steps import Batch, _classifier_update, clean_loss_and_grads, guard_loss
from ..training.trace import TraceEvaluator, TrainTrace
from .transition_estimators import EstimatorOutput, estimate_forward, estimate_glc

logger = logging.getLogger(__name__)

TWO_STAGE_ESTIMATORS = ("forward", "glc")


@dataclass(frozen=True)
class BaselineConfig:
    """Step sizes and schedules shared by the baselines."""
    lr: float = 0.1
    epochs: int = 20
    batch_size: int = 100
    finetune_lr: float = 0.05
    finetune_epochs: int = 20
    smodel_lr_theta: Optional[float] = None
    retrain_from_scratch: bool = True

    def __post_init__(self) -> None:
        if self.lr < 0 or self.finetune_lr < 0:
            raise InvalidConfigError("learning rates must be >= 0")
        if self.smodel_lr_theta is not None and self.smodel_lr_theta < 0:
            raise InvalidConfigError("smodel_lr_theta must be >= 0")
        if self.epochs < 0 or self.finetune_epochs < 0:
            raise InvalidConfigError("epochs must be >= 0")
        if self.batch_size < 1:
            raise InvalidConfigError(f"batch_size must be >= 1, got {self.batch_size}")

    @property
    def effective_lr_theta(self) -> float:
        return self.lr if self.smodel_lr_theta is None else self.smodel_lr_theta

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "BaselineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise InvalidConfigError(f"unknown baselines settings: {sorted(unknown)}")
        return cls(**values)


def _sgd_on_clean_loss(params: MlpParams, features: np.ndarray, labels: np.ndarray,
                       indices: np.ndarray, lr: float, epochs: int, batch_size: int,
                       rng: SeededRng, name: str) -> MlpParams:
    if lr < 0:
        raise InvalidConfigError(f"learning rate must be >= 0, got {lr}")
    if epochs <= 0:
        return params
    sampler = MiniBatchSampler(indices, batch_size, rng)
    iteration = 0
    for epoch in range(1, epochs + 1):
        losses = []
        for _ in range(sampler.batches_per_epoch):
            iteration += 1
            batch = Batch.take(features, labels, sampler.next_batch())
            loss, grads, _ = clean_loss_and_grads(params, batch)
            guard_loss(loss, iteration)
            params = sgd_step(params, grads, lr)
            losses.append(loss)
        logger.debug("%s epoch %d/%d: mean loss %.6f", name, epoch, epochs, float(np.mean(losses)))
    return params


def train_ce(dataset: LabeledDataset, mlp_config: MlpConfig, lr: float, epochs: int,
             rng: SeededRng, batch_size: int = 100) -> MlpParams:
    """Plain cross-entropy SGD on the training labels (noisy when corrupted).

    Weights come from ``rng.spawn("init")`` and batches from
    ``rng.spawn("train_batches")``.

    Raises:
        InvalidConfigError: If the training split is empty
    """
    train_idx = dataset.require_split(TRAIN, "CE training")
    dims = mlp_config.layer_dims(dataset.dim, dataset.num_classes)
    params = init_mlp(dims, mlp_config.init_scale, rng.spawn("init"))
    params = _sgd_on_clean_loss(params, dataset.features, dataset.training_labels(),
                                train_idx, lr, epochs, batch_size,
                                rng.spawn("train_batches"), "ce")
    logger.info("CE training finished after %d epochs", epochs)
    return params


def finetune(params: MlpParams, dataset: LabeledDataset, lr: float, epochs: int,
             rng: SeededRng, batch_size: int = 100) -> MlpParams:
    """Continue CE SGD on the clean meta split only.

    Raises:
        InvalidConfigError: If the meta split is empty
    """
    meta_idx = dataset.require_split(META, "fine-tuning")
    return _sgd_on_clean_loss(params, dataset.features, dataset.clean_labels, meta_idx,
                              lr, epochs, batch_size, rng.spawn("finetune_batches"), "finetune")


def train_smodel(dataset: LabeledDataset, mlp_config: MlpConfig, theta_init, lr: float,
                 lr_theta: float, epochs: int, rng: SeededRng, batch_size: int = 100,
                 initial_params: Optional[MlpParams] = None,
                 trace: Optional[TrainTrace] = None, log_interval: int = 100,
                 ground_truth=None, divergence_threshold: float = 1e6,
                 eps: float = DEFAULT_EPS) -> Tuple[MlpParams, TransitionState]:
    """Joint SGD on the transition-corrected loss over classifier and ``Θ``.

    Each step updates ``W`` and ``Θ`` from the same noisy batch; no meta data
    is used. With ``lr_theta = 0`` this is classifier training against the
    fixed ``T(theta_init)``.

    Returns:
        (params, final TransitionState); predictions use the classifier alone

    Raises:
        ShapeError: If ``theta_init`` does not match the class count
        DivergenceError: On a non-finite or exploding loss
    """
    if lr < 0 or lr_theta < 0:
        raise InvalidConfigError("learning rates must be >= 0")
    if log_interval < 1:
        raise InvalidConfigError(f"log_interval must be >= 1, got {log_interval}")
    train_idx = dataset.require_split(TRAIN, "S-Model training")
    state = from_logits(theta_init)
    c = dataset.num_classes
    if state.num_classes != c:
        raise ShapeError(f"theta_init is {state.logits.shape}, dataset has {c} classes")
    if initial_params is None:
        dims = mlp_config.layer_dims(dataset.dim, c)
        params = init_mlp(dims, mlp_config.init_scale, rng.spawn("init"))
    else:
        params = initial_params
    sampler = MiniBatchSampler(train_idx, batch_size, rng.spawn("train_batches"))
    features, labels = dataset.features, dataset.training_labels()
    iterations = epochs * sampler.batches_per_epoch
    evaluator = TraceEvaluator.for_dataset(dataset, ground_truth) if trace is not None else None
    if trace is not None:
        trace.record(evaluator.row(0, params, state))

    for t in range(1, iterations + 1):
        batch = Batch.take(features, labels, sampler.next_batch())
        params, result = _classifier_update(params, state, batch, lr, eps)
        guard_loss(result.loss, t, divergence_threshold)
        if lr_theta > 0:
            state = from_logits(state.logits - lr_theta * grad_wrt_logits(state, result.transition_grad))
        if t % log_interval == 0 or t == iterations:
            logger.info("smodel iteration %d/%d: noisy loss %.6f", t, iterations, result.loss)
            if trace is not None:
                trace.record(evaluator.row(t, params, state, noisy_loss=result.loss))
    return params, state


def train_with_fixed_transition(dataset: LabeledDataset, mlp_config: MlpConfig, matrix,
                                lr: float, epochs: int, rng: SeededRng, batch_size: int = 100,
                                initial_params: Optional[MlpParams] = None) -> MlpParams:
    """Train the classifier against a frozen transition estimate."""
    theta = logits_from_estimate(matrix)
    params, _ = train_smodel(dataset, mlp_config, theta, lr, 0.0, epochs, rng,
                             batch_size=batch_size, initial_params=initial_params)
    return params


def estimate_from_ce(params_ce: MlpParams, dataset: LabeledDataset,
                     estimator: str) -> EstimatorOutput:
    """Run the Forward or GLC estimator on a CE-trained classifier."""
    if estimator == "forward":
        features, _ = dataset.split_arrays(TRAIN)
        return estimate_forward(params_ce, features)
    if estimator == "glc":
        dataset.require_split(META, "GLC estimation")
        features, labels = dataset.split_arrays(META)
        return estimate_glc(params_ce, features, labels)
    raise InvalidConfigError(
        f"unknown estimator '{estimator}', expected one of {', '.join(TWO_STAGE_ESTIMATORS)}"
    )


def train_two_stage(dataset: LabeledDataset, mlp_config: MlpConfig, config: BaselineConfig,
                    estimator: str, seed: int) -> Tuple[MlpParams, EstimatorOutput]:
    """Estimate T from a CE model, then train against the fixed estimate.

    The second stage starts from a fresh initialization with the same seed,
    or from the CE weights when ``retrain_from_scratch`` is off.
    """
    params_ce = train_ce(dataset, mlp_config, config.lr, config.epochs, SeededRng(seed),
                         config.batch_size)
    estimate = estimate_from_ce(params_ce, dataset, estimator)
    initial = None if config.retrain_from_scratch else params_ce
    params = train_with_fixed_transition(dataset, mlp_config, estimate.matrix, config.lr,
                                         config.epochs, SeededRng(seed), config.batch_size,
                                         initial_params=initial)
    logger.info("%s two-stage training finished", estimator)
    return params, estimate
