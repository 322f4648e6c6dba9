"""Alternating meta update of the transition and classifier update.

Each iteration draws a noisy training batch and a clean meta batch, moves
``Θ`` against the meta gradient measured through a virtual classifier step,
then takes the persistent classifier step with the freshly updated ``T`` on
the same training batch.
"""

import logging
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..core.functional import DEFAULT_EPS
from ..core.rng import SeededRng
from ..data.dataset import META, TRAIN, LabeledDataset
from ..errors import DivergenceError, InvalidConfigError, InvalidInputError
from ..estimators.baselines import BaselineConfig, estimate_from_ce, train_ce
from ..estimators.transition_estimators import EstimatorOutput
from ..model.classifier import MlpConfig, MlpParams, init_mlp
from ..noise.transition import (
    TransitionState,
    from_logits,
    logits_from_estimate,
    symmetric_matrix,
)
from .hypergradient import DEFAULT_FD_EPSILON, HYPERGRAD_MODES, meta_step
from .sampler import MiniBatchSampler
from .steps import Batch, _classifier_update, clean_loss_and_grads, guard_loss
from .trace import TraceEvaluator, TrainTrace

logger = logging.getLogger(__name__)

INIT_SOURCES = ("glc", "forward", "uniform", "identity")
IDENTITY_INIT_RATE = 0.05


@dataclass(frozen=True)
class TrainConfig:
    """Settings of one meta-adaptation run."""
    alpha: float = 0.1
    beta: Optional[float] = None
    batch_size: int = 100
    meta_batch_size: int = 30
    iterations: int = 1200
    seed: int = 0
    init_source: str = "glc"
    hypergrad_mode: str = "exact"
    fd_epsilon: float = DEFAULT_FD_EPSILON
    log_interval: int = 100
    divergence_threshold: float = 1e6
    eps: float = DEFAULT_EPS

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise InvalidConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta is not None and self.beta < 0:
            raise InvalidConfigError(f"beta must be >= 0, got {self.beta}")
        if self.batch_size < 1 or self.meta_batch_size < 1:
            raise InvalidConfigError("batch sizes must be >= 1")
        if self.iterations < 0:
            raise InvalidConfigError(f"iterations must be >= 0, got {self.iterations}")
        if self.init_source not in INIT_SOURCES:
            raise InvalidConfigError(
                f"unknown init source '{self.init_source}', expected one of {', '.join(INIT_SOURCES)}"
            )
        if self.hypergrad_mode not in HYPERGRAD_MODES:
            raise InvalidConfigError(
                f"unknown hypergradient mode '{self.hypergrad_mode}', "
                f"expected one of {', '.join(HYPERGRAD_MODES)}"
            )
        if self.fd_epsilon <= 0 or self.eps <= 0:
            raise InvalidConfigError("fd_epsilon and eps must be positive")
        if self.log_interval < 1:
            raise InvalidConfigError(f"log_interval must be >= 1, got {self.log_interval}")

    @property
    def effective_beta(self) -> float:
        """Meta step size; defaults to alpha."""
        return self.alpha if self.beta is None else self.beta

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any], seed: Optional[int] = None) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise InvalidConfigError(f"unknown meta settings: {sorted(unknown)}")
        values = dict(values)
        if seed is not None:
            values['seed'] = seed
        return cls(**values)


def resolve_initial_transition(dataset: LabeledDataset, source: str, seed: int,
                               mlp_config: MlpConfig,
                               baseline_config: Optional[BaselineConfig] = None
                               ) -> Tuple[TransitionState, Optional[EstimatorOutput]]:
    """Starting ``Θ`` for the meta method and S-Model.

    ``glc`` and ``forward`` fit a CE classifier with the seed's streams and
    estimate ``T`` from it; ``uniform`` is ``Θ = 0``; ``identity`` is the
    softened identity ``symmetric(c, 0.05)``.

    Returns:
        (initial state, the estimator output when one was trained)
    """
    c = dataset.num_classes
    if source == "uniform":
        return from_logits(np.zeros((c, c))), None
    if source == "identity":
        return from_logits(logits_from_estimate(symmetric_matrix(c, IDENTITY_INIT_RATE))), None
    if source not in ("glc", "forward"):
        raise InvalidConfigError(f"unknown init source '{source}'")
    config = baseline_config or BaselineConfig()
    params_ce = train_ce(dataset, mlp_config, config.lr, config.epochs, SeededRng(seed),
                         config.batch_size)
    estimate = estimate_from_ce(params_ce, dataset, source)
    logger.info("Initial transition from %s estimate", source)
    return from_logits(logits_from_estimate(estimate.matrix)), estimate


def run_meta_adaptation(dataset: LabeledDataset, config: TrainConfig, mlp_config: MlpConfig,
                        initial_state: Optional[TransitionState] = None,
                        ground_truth=None,
                        baseline_config: Optional[BaselineConfig] = None
                        ) -> Tuple[MlpParams, TransitionState, TrainTrace]:
    """Jointly learn the classifier and the transition guided by the meta split.

    Args:
        dataset: Dataset with noisy train labels and clean meta labels
        config: Step sizes, batch sizes, iteration count and seed
        mlp_config: Classifier architecture
        initial_state: Starting transition; resolved from
            ``config.init_source`` when omitted
        ground_truth: True T, used only for the trace's estimation error
        baseline_config: CE settings used when the init source trains one

    Returns:
        (final params, final TransitionState, TrainTrace)

    Raises:
        InvalidConfigError: If the train or meta split is missing
        DivergenceError: On a non-finite or exploding loss
    """
    train_idx = dataset.require_split(TRAIN, "meta adaptation")
    meta_idx = dataset.require_split(META, "meta adaptation")
    if initial_state is None:
        initial_state, _ = resolve_initial_transition(
            dataset, config.init_source, config.seed, mlp_config, baseline_config)
    state = initial_state

    rng = SeededRng(config.seed)
    dims = mlp_config.layer_dims(dataset.dim, dataset.num_classes)
    params = init_mlp(dims, mlp_config.init_scale, rng.spawn("init"))
    train_sampler = MiniBatchSampler(train_idx, config.batch_size, rng.spawn("train_batches"))
    meta_sampler = MiniBatchSampler(meta_idx, config.meta_batch_size, rng.spawn("meta_batches"))
    features = dataset.features
    noisy_labels, clean_labels = dataset.training_labels(), dataset.clean_labels
    beta = config.effective_beta

    trace = TrainTrace()
    evaluator = TraceEvaluator.for_dataset(dataset, ground_truth)
    trace.record(evaluator.row(0, params, state))
    logger.info("Meta adaptation: %d iterations, alpha=%g, beta=%g, mode=%s",
                config.iterations, config.alpha, beta, config.hypergrad_mode)

    for t in range(1, config.iterations + 1):
        train_batch = Batch.take(features, noisy_labels, train_sampler.next_batch())
        meta_batch = Batch.take(features, clean_labels, meta_sampler.next_batch())
        if beta > 0:
            try:
                state = meta_step(state, params, train_batch, meta_batch, config.alpha, beta,
                                  config.hypergrad_mode, config.fd_epsilon, config.eps)
            except InvalidInputError:
                raise DivergenceError(t, float('nan'), "transition logits")
        params, result = _classifier_update(params, state, train_batch, config.alpha, config.eps)
        guard_loss(result.loss, t, config.divergence_threshold)

        if t % config.log_interval == 0 or t == config.iterations:
            meta_loss = clean_loss_and_grads(params, meta_batch, config.eps)[0]
            guard_loss(meta_loss, t, config.divergence_threshold, "meta_loss")
            row = evaluator.row(t, params, state, noisy_loss=result.loss, meta_loss=meta_loss)
            trace.record(row)
            logger.info("iteration %d/%d: noisy loss %.6f, meta loss %.6f%s", t,
                        config.iterations, result.loss, meta_loss,
                        "" if row.est_error is None else f", estimation error {row.est_error:.4f}")
    return params, state, trace
