"""End-to-end runs of one method on one dataset."""

import logging
import os
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..config_manager import ConfigManager
from ..core.rng import SeededRng
from ..data.dataset import TEST, TRAIN, LabeledDataset, corrupt_dataset, split_dataset
from ..data.dataset_io import save_checkpoint, write_transition_csv
from ..data.mixture import MixtureSpec, generate_mixture
from ..errors import InvalidConfigError
from ..estimators.baselines import finetune, train_ce, train_smodel, train_two_stage
from ..metrics.bounds import bound_inputs_for, rademacher_bound
from ..metrics.evaluation import accuracy, estimation_error
from ..model.classifier import MlpParams, predict
from ..noise.corruption import CorruptionReport
from ..noise.transition import NoiseSpec
from ..performance.performance_stats import RunTimingStats
from ..training.meta_trainer import TrainConfig, resolve_initial_transition, run_meta_adaptation
from ..training.trace import TrainTrace
from .results import METHODS, ExperimentRecord

NO_NOISE = "none"


@dataclass
class MethodOutcome:
    """Everything one run produced."""
    record: ExperimentRecord
    params: MlpParams
    estimate: Optional[np.ndarray] = None
    trace: Optional[TrainTrace] = None


def build_clean_dataset(spec: MixtureSpec, counts: Tuple[Optional[int], int, int],
                        seed: int) -> LabeledDataset:
    """Generate a mixture and split it, using the seed's ``data`` and ``split`` streams."""
    rng = SeededRng(seed)
    dataset = generate_mixture(spec, rng.spawn("data"))
    n_train, n_meta, n_test = counts
    return split_dataset(dataset, n_train, n_meta, n_test, rng.spawn("split"))


def apply_noise(dataset: LabeledDataset, noise: NoiseSpec,
                seed: int) -> Tuple[LabeledDataset, np.ndarray, CorruptionReport]:
    """Corrupt the training split with the seed's ``noise`` stream."""
    matrix = noise.matrix(dataset.num_classes)
    noisy, report = corrupt_dataset(dataset, matrix, SeededRng(seed).spawn("noise"))
    return noisy, matrix, report


class ExperimentRunner:
    """Runs any of the six methods and turns the result into an ExperimentRecord."""

    def __init__(self, config_manager: ConfigManager,
                 timing: Optional[RunTimingStats] = None):
        """Initialize the runner.

        Args:
            config_manager: Configuration manager instance
            timing: Shared timing statistics; created from config when None
        """
        self.config_manager = config_manager
        self.logger = logging.getLogger(__name__)
        self.mlp_config = config_manager.get_mlp_config()
        self.baseline_config = config_manager.get_baseline_config()
        self.evaluation = config_manager.get_evaluation_config()
        self.timing = timing or RunTimingStats(config_manager.is_timing_enabled())

    def train_config(self, seed: int, **overrides) -> TrainConfig:
        return self.config_manager.get_train_config(seed, **overrides)

    def run_method(self, method: str, dataset: LabeledDataset, seed: int,
                   noise: Optional[NoiseSpec] = None, ground_truth=None,
                   train_config: Optional[TrainConfig] = None,
                   output_dir: Optional[str] = None) -> MethodOutcome:
        """Train ``method`` on ``dataset`` and evaluate it on the test split.

        Args:
            method: One of ce, finetune, forward, glc, smodel, meta
            dataset: Split (and usually corrupted) dataset
            seed: Run seed
            noise: Noise the dataset was corrupted with, for the record
            ground_truth: True T for the estimation error
            train_config: Meta settings; built from config when None
            output_dir: Where to write checkpoint, transition and trace

        Raises:
            InvalidConfigError: For an unknown method or a missing split
        """
        if method not in METHODS:
            raise InvalidConfigError(
                f"unknown method '{method}', expected one of {', '.join(METHODS)}"
            )
        dataset.require_split(TEST, "evaluation")
        config = train_config or self.train_config(seed)
        self.logger.info("Running %s (seed %d)", method, seed)

        with self.timing.timed("train", method) as clock:
            params, estimate, trace = self._train(method, dataset, seed, config, ground_truth)

        test_features, test_labels = dataset.split_arrays(TEST)
        test_accuracy = accuracy(predict(params, test_features), test_labels)
        est_error = None
        if estimate is not None and ground_truth is not None:
            est_error = estimation_error(ground_truth, estimate)
        train_features, _ = dataset.split_arrays(TRAIN)
        bound = rademacher_bound(bound_inputs_for(
            params, train_features, len(train_features),
            self.evaluation['delta'], self.evaluation['eps']))

        record = ExperimentRecord(
            method=method,
            noise_kind=noise.kind if noise else NO_NOISE,
            rate=noise.rate if noise else 0.0,
            seed=seed,
            test_accuracy=test_accuracy,
            estimation_error=est_error,
            bound_value=bound,
            wall_time_seconds=clock['seconds'],
        )
        self.logger.info("%s seed %d: test accuracy %.4f%s", method, seed, test_accuracy,
                         "" if est_error is None else f", estimation error {est_error:.4f}")
        outcome = MethodOutcome(record, params, estimate, trace)
        if output_dir:
            self.write_artifacts(outcome, output_dir)
        return outcome

    def _train(self, method: str, dataset: LabeledDataset, seed: int, config: TrainConfig,
               ground_truth) -> Tuple[MlpParams, Optional[np.ndarray], Optional[TrainTrace]]:
        baseline = self.baseline_config
        if method == "ce":
            return train_ce(dataset, self.mlp_config, baseline.lr, baseline.epochs,
                            SeededRng(seed), baseline.batch_size), None, None
        if method == "finetune":
            params = train_ce(dataset, self.mlp_config, baseline.lr, baseline.epochs,
                              SeededRng(seed), baseline.batch_size)
            params = finetune(params, dataset, baseline.finetune_lr, baseline.finetune_epochs,
                              SeededRng(seed), baseline.batch_size)
            return params, None, None
        if method in ("forward", "glc"):
            params, estimate = train_two_stage(dataset, self.mlp_config, baseline, method, seed)
            return params, estimate.matrix, None

        initial_state, _ = resolve_initial_transition(
            dataset, config.init_source, seed, self.mlp_config, baseline)
        if method == "smodel":
            trace = TrainTrace()
            params, state = train_smodel(
                dataset, self.mlp_config, initial_state.logits, baseline.lr,
                baseline.effective_lr_theta, baseline.epochs, SeededRng(seed),
                batch_size=baseline.batch_size, trace=trace,
                log_interval=config.log_interval, ground_truth=ground_truth,
                divergence_threshold=config.divergence_threshold, eps=config.eps)
            return params, state.matrix, trace
        params, state, trace = run_meta_adaptation(
            dataset, config, self.mlp_config, initial_state=initial_state,
            ground_truth=ground_truth, baseline_config=baseline)
        return params, state.matrix, trace

    def write_artifacts(self, outcome: MethodOutcome, output_dir: str) -> None:
        """Write ``checkpoint.txt``, ``transition.csv`` and ``trace.csv``."""
        os.makedirs(output_dir, exist_ok=True)
        save_checkpoint(outcome.params, os.path.join(output_dir, "checkpoint.txt"))
        if outcome.estimate is not None:
            write_transition_csv(outcome.estimate, os.path.join(output_dir, "transition.csv"))
        if outcome.trace is not None:
            outcome.trace.write_csv(os.path.join(output_dir, "trace.csv"))
        self.logger.info("Artifacts written to %s", output_dir)
