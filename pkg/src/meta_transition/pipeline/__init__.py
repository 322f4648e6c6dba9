"""Experiment runs, results storage and sweeps."""

from .results import METHODS, ExperimentRecord, ResultsStore, summarize_records, write_summary
from .experiment_runner import ExperimentRunner, MethodOutcome, apply_noise, build_clean_dataset
from .sweep_state_manager import CellStatus, SweepStateManager
from .sweep_processor import SweepCell, SweepManifest, SweepProcessor

__all__ = [
    "METHODS",
    "ExperimentRecord",
    "ResultsStore",
    "summarize_records",
    "write_summary",
    "ExperimentRunner",
    "MethodOutcome",
    "apply_noise",
    "build_clean_dataset",
    "CellStatus",
    "SweepStateManager",
    "SweepCell",
    "SweepManifest",
    "SweepProcessor",
]
