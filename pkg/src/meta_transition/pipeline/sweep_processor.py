"""Parallel sweeps over methods x noise settings x seeds.

Every cell is independent: it rebuilds its dataset from its own seed,
corrupts it and trains one method. Records are appended by a single writer,
and cells already present in the results file are skipped, so an
interrupted sweep resumes where it stopped.
"""

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from tqdm import tqdm

from ..config_manager import ConfigManager
from ..data.dataset import LabeledDataset
from ..data.dataset_io import read_dataset_csv
from ..errors import InvalidConfigError
from ..noise.transition import NOISE_KINDS, NoiseSpec
from ..performance.performance_stats import RunTimingStats
from .experiment_runner import ExperimentRunner, apply_noise, build_clean_dataset
from .results import METHODS, CellKey, ResultsStore, cell_key
from .sweep_state_manager import SweepStateManager, cell_name

# noise rates swept when a manifest entry gives none
DEFAULT_RATES = (0.0, 0.2, 0.4, 0.6, 0.8)


@dataclass(frozen=True)
class SweepCell:
    method: str
    noise: NoiseSpec
    seed: int

    @property
    def key(self) -> CellKey:
        return cell_key(self.method, self.noise.kind, self.noise.rate, self.seed)


@dataclass
class SweepManifest:
    """Grid definition loaded from YAML.

    Example::

        methods: [ce, glc, meta]
        noise:
          - {kind: symmetric, rates: [0.2, 0.4]}
          - {kind: pairs, rates: [0.2], pairs: cyclic}
        seeds: [1, 2]
        dataset: null
    """
    methods: List[str]
    noise: List[Dict[str, Any]]
    seeds: List[int]
    dataset: Optional[str] = None
    num_classes: int = 3
    config: Dict[str, Any] = field(default_factory=dict)

    def cells(self) -> List[SweepCell]:
        cells = []
        for entry in self.noise:
            for rate in entry.get('rates', DEFAULT_RATES):
                spec = NoiseSpec.from_args(entry['kind'], float(rate), entry.get('pairs'),
                                           self.num_classes)
                for seed in self.seeds:
                    for method in self.methods:
                        cells.append(SweepCell(method, spec, int(seed)))
        return cells

    @classmethod
    def from_dict(cls, raw: Dict[str, Any], num_classes: int) -> "SweepManifest":
        """Validate a parsed manifest.

        Raises:
            InvalidConfigError: On missing or invalid entries
        """
        if not isinstance(raw, dict):
            raise InvalidConfigError("sweep manifest must be a mapping")
        methods = list(raw.get('methods') or [])
        unknown = [m for m in methods if m not in METHODS]
        if not methods or unknown:
            raise InvalidConfigError(
                f"sweep methods must be a non-empty subset of {', '.join(METHODS)}"
            )
        noise = raw.get('noise') or [{'kind': 'symmetric', 'rates': list(DEFAULT_RATES)}]
        for entry in noise:
            if not isinstance(entry, dict) or entry.get('kind') not in NOISE_KINDS:
                raise InvalidConfigError(f"invalid noise entry {entry!r}")
        seeds = [int(s) for s in (raw.get('seeds') or [0])]
        manifest = cls(methods=methods, noise=noise, seeds=seeds,
                       dataset=raw.get('dataset'), num_classes=num_classes,
                       config=raw.get('config') or {})
        manifest.cells()
        return manifest


class SweepProcessor:
    """Runs the cells of a manifest on a thread pool."""

    def __init__(self, config_manager: ConfigManager, results_path: str,
                 state_path: Optional[str] = None):
        """Initialize the sweep processor.

        Args:
            config_manager: Configuration manager instance
            results_path: Results CSV to append to
            state_path: YAML sweep state file; defaults next to the results
        """
        self.config_manager = config_manager
        self.logger = logging.getLogger(__name__)
        sweep_config = config_manager.get_sweep_config()
        self.num_workers = sweep_config['workers']
        self.show_progress = sweep_config['show_progress']
        self.store = ResultsStore(results_path)
        if state_path is None:
            state_path = os.path.splitext(results_path)[0] + "_state.yml"
        timing_enabled = config_manager.is_timing_enabled()
        self.state_manager = SweepStateManager(state_path, record_times=timing_enabled)
        self.timing = RunTimingStats(timing_enabled)
        self.runner = ExperimentRunner(config_manager, self.timing)
        self._clean_dataset: Optional[LabeledDataset] = None

    def _clean_for(self, manifest: SweepManifest, seed: int) -> LabeledDataset:
        if manifest.dataset:
            if self._clean_dataset is None:
                self._clean_dataset = read_dataset_csv(manifest.dataset)
            return self._clean_dataset
        return build_clean_dataset(self.config_manager.get_mixture_spec(),
                                   self.config_manager.get_split_counts(), seed)

    def _run_cell(self, cell: SweepCell, manifest: SweepManifest) -> Tuple[bool, str]:
        key = cell.key
        self.state_manager.mark_running(key)
        try:
            clean = self._clean_for(manifest, cell.seed)
            dataset, truth, _ = apply_noise(clean, cell.noise, cell.seed)
            outcome = self.runner.run_method(cell.method, dataset, cell.seed,
                                             noise=cell.noise, ground_truth=truth)
            self.store.append(outcome.record)
            self.state_manager.mark_completed(key)
            return True, ""
        except Exception as e:
            self.logger.error("Cell %s failed: %s", cell_name(key), e, exc_info=True)
            self.state_manager.mark_failed(key, str(e))
            return False, str(e)
        finally:
            self.state_manager.save_state()

    def run(self, manifest: SweepManifest) -> Dict[str, Any]:
        """Run every pending cell and return a report.

        Returns:
            Report with ``summary`` counts, ``errors`` and ``timing``
        """
        start_time = time.time()
        cells = manifest.cells()
        done = self.store.completed_keys()
        pending = []
        for cell in cells:
            if cell.key in done:
                self.state_manager.mark_skipped(cell.key)
            else:
                pending.append(cell)
        self.state_manager.save_state()

        self.logger.info("=" * 60)
        self.logger.info("Sweep: %d cells, %d already done, %d to run with %d workers",
                         len(cells), len(cells) - len(pending), len(pending), self.num_workers)
        self.logger.info("=" * 60)

        errors = []
        successful = 0
        progress_bar = None
        if self.show_progress and pending:
            progress_bar = tqdm(total=len(pending), desc="Sweep cells", unit="cell")
        try:
            with ThreadPoolExecutor(max_workers=self.num_workers) as executor:
                future_to_cell = {
                    executor.submit(self._run_cell, cell, manifest): cell
                    for cell in pending
                }
                for future in as_completed(future_to_cell):
                    cell = future_to_cell[future]
                    ok, error = future.result()
                    if ok:
                        successful += 1
                    else:
                        errors.append({'cell': cell_name(cell.key), 'error': error})
                    if progress_bar:
                        progress_bar.update(1)
        finally:
            if progress_bar:
                progress_bar.close()
        self.store.reorder([cell.key for cell in cells])

        results_dir = os.path.dirname(os.path.abspath(self.store.path))
        self.timing.save_stats_to_file(os.path.join(results_dir, "performance_stats.yml"))
        report = {
            'summary': {
                'total_cells': len(cells),
                'skipped': len(cells) - len(pending),
                'successful': successful,
                'failed': len(errors),
            },
            'errors': errors,
            'timing': {'total_time': round(time.time() - start_time, 3)},
        }
        self._log_report(report)
        return report

    def _log_report(self, report: Dict[str, Any]) -> None:
        summary = report['summary']
        self.logger.info("=" * 60)
        self.logger.info("SWEEP COMPLETED")
        self.logger.info("=" * 60)
        self.logger.info("Total cells: %d", summary['total_cells'])
        self.logger.info("Skipped (already done): %d", summary['skipped'])
        self.logger.info("Successful: %d", summary['successful'])
        self.logger.info("Failed: %d", summary['failed'])
        self.logger.info("Total time: %ss", report['timing']['total_time'])
        for error in report['errors']:
            self.logger.error("  - %s: %s", error['cell'], error['error'])
