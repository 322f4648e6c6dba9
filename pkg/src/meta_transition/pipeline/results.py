"""Experiment records, the results CSV and its summary."""

import logging
import math
import os
import threading
from dataclasses import dataclass, fields
from typing import List, Optional, Sequence, Set, Tuple

import pandas as pd

from ..errors import DatasetParseError, InvalidInputError

METHODS = ("ce", "finetune", "forward", "glc", "smodel", "meta")
RESULTS_HEADER = ("method", "noise_kind", "rate", "seed", "test_accuracy",
                  "estimation_error", "bound_value", "wall_time_seconds")

CellKey = Tuple[str, str, float, int]


def _optional(value: str) -> Optional[float]:
    return None if value == "" else float(value)


def _cell(value: Optional[float]) -> str:
    return "" if value is None else "%.17g" % value


@dataclass(frozen=True)
class ExperimentRecord:
    """One row of the results table."""
    method: str
    noise_kind: str
    rate: float
    seed: int
    test_accuracy: float
    estimation_error: Optional[float] = None
    bound_value: Optional[float] = None
    wall_time_seconds: Optional[float] = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise InvalidInputError(f"unknown method '{self.method}'")
        if not 0.0 <= self.test_accuracy <= 1.0:
            raise InvalidInputError(f"test accuracy {self.test_accuracy} outside [0, 1]")
        if self.estimation_error is not None and not (
                self.estimation_error >= 0 and math.isfinite(self.estimation_error)):
            raise InvalidInputError(f"invalid estimation error {self.estimation_error}")

    @property
    def key(self) -> CellKey:
        return cell_key(self.method, self.noise_kind, self.rate, self.seed)

    def to_row(self) -> List[str]:
        return [
            self.method,
            self.noise_kind,
            "%.17g" % self.rate,
            str(self.seed),
            "%.17g" % self.test_accuracy,
            _cell(self.estimation_error),
            _cell(self.bound_value),
            _cell(self.wall_time_seconds),
        ]

    @classmethod
    def from_row(cls, cells: List[str]) -> "ExperimentRecord":
        return cls(
            method=cells[0],
            noise_kind=cells[1],
            rate=float(cells[2]),
            seed=int(cells[3]),
            test_accuracy=float(cells[4]),
            estimation_error=_optional(cells[5]),
            bound_value=_optional(cells[6]),
            wall_time_seconds=_optional(cells[7]),
        )


def cell_key(method: str, noise_kind: str, rate: float, seed: int) -> CellKey:
    # rates are compared at 12 decimals so 0.4 from YAML and from the CSV agree
    return (method, noise_kind, round(float(rate), 12), int(seed))


class ResultsStore:
    """Append-only results CSV with a single writer."""

    def __init__(self, path: str):
        self.path = path
        self.lock = threading.Lock()
        self.logger = logging.getLogger(__name__)

    def read(self) -> List[ExperimentRecord]:
        """All records in file order; empty when the file does not exist."""
        if not os.path.exists(self.path):
            return []
        with open(self.path, 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()
        if not lines:
            return []
        if tuple(lines[0].split(",")) != RESULTS_HEADER:
            raise DatasetParseError("unexpected results header", 1, self.path)
        records = []
        for line_number, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            cells = line.split(",")
            if len(cells) != len(RESULTS_HEADER):
                raise DatasetParseError("wrong number of result cells", line_number, self.path)
            try:
                records.append(ExperimentRecord.from_row(cells))
            except ValueError as e:
                raise DatasetParseError(str(e), line_number, self.path)
        return records

    def completed_keys(self) -> Set[CellKey]:
        return {record.key for record in self.read()}

    def append(self, record: ExperimentRecord) -> None:
        """Append one row, writing the header first for a new file."""
        with self.lock:
            parent = os.path.dirname(os.path.abspath(self.path))
            os.makedirs(parent, exist_ok=True)
            new_file = not os.path.exists(self.path) or os.path.getsize(self.path) == 0
            with open(self.path, 'a', encoding='utf-8', newline='\n') as f:
                if new_file:
                    f.write(",".join(RESULTS_HEADER) + "\n")
                f.write(",".join(record.to_row()) + "\n")
        self.logger.debug("Appended %s to %s", record.key, self.path)

    def reorder(self, keys: Sequence[CellKey]) -> None:
        """Rewrite the file with rows in the order of ``keys``.

        Rows whose key is not listed keep their relative order after the
        listed ones. Parallel sweeps append in completion order.
        """
        with self.lock:
            records = self.read()
            if not records:
                return
            rank = {key: i for i, key in enumerate(keys)}
            ordered = sorted(records, key=lambda r: rank.get(r.key, len(rank)))
            tmp_path = self.path + ".tmp"
            with open(tmp_path, 'w', encoding='utf-8', newline='\n') as f:
                f.write(",".join(RESULTS_HEADER) + "\n")
                for record in ordered:
                    f.write(",".join(record.to_row()) + "\n")
            os.replace(tmp_path, self.path)


def records_frame(records: List[ExperimentRecord]) -> pd.DataFrame:
    columns = [f.name for f in fields(ExperimentRecord)]
    return pd.DataFrame([[getattr(r, c) for c in columns] for r in records], columns=columns)


def summarize_records(records: List[ExperimentRecord]) -> pd.DataFrame:
    """Mean, std and count of accuracy and estimation error per (method, noise_kind, rate)."""
    frame = records_frame(records)
    if frame.empty:
        return pd.DataFrame(columns=[
            "method", "noise_kind", "rate", "runs",
            "test_accuracy_mean", "test_accuracy_std",
            "estimation_error_mean", "estimation_error_std",
        ])
    frame["estimation_error"] = frame["estimation_error"].astype(float)
    grouped = frame.groupby(["method", "noise_kind", "rate"], sort=True)
    summary = grouped.agg(
        runs=("seed", "count"),
        test_accuracy_mean=("test_accuracy", "mean"),
        test_accuracy_std=("test_accuracy", "std"),
        estimation_error_mean=("estimation_error", "mean"),
        estimation_error_std=("estimation_error", "std"),
    )
    return summary.reset_index()


def write_summary(records: List[ExperimentRecord], path: str) -> pd.DataFrame:
    summary = summarize_records(records)
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    summary.to_csv(path, index=False, float_format="%.6g")
    return summary
