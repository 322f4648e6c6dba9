"""Per-iteration training records and their CSV form."""

import math
from dataclasses import dataclass
from typing import List, Optional

from ..errors import DatasetParseError, InvalidInputError
from ..metrics.evaluation import accuracy, estimation_error
from ..model.classifier import predict

TRACE_HEADER = ("iter", "noisy_loss", "meta_loss", "est_error", "test_acc")


def _cell(value: Optional[float]) -> str:
    return "" if value is None else "%.17g" % value


def _parse(value: str) -> Optional[float]:
    return None if value == "" else float(value)


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    noisy_loss: Optional[float] = None
    meta_loss: Optional[float] = None
    est_error: Optional[float] = None
    test_acc: Optional[float] = None

    def values(self) -> tuple:
        return (self.noisy_loss, self.meta_loss, self.est_error, self.test_acc)


class TrainTrace:
    """Logged training steps in increasing iteration order."""

    def __init__(self) -> None:
        self.rows: List[TraceRow] = []

    def __len__(self) -> int:
        return len(self.rows)

    def record(self, row: TraceRow) -> None:
        """Append a row.

        Raises:
            InvalidInputError: If the iteration does not increase or a value
                is not finite
        """
        if self.rows and row.iteration <= self.rows[-1].iteration:
            raise InvalidInputError(
                f"trace iterations must increase: {row.iteration} after {self.rows[-1].iteration}"
            )
        if any(v is not None and not math.isfinite(v) for v in row.values()):
            raise InvalidInputError(f"non-finite value in trace row {row}")
        self.rows.append(row)

    @property
    def last(self) -> Optional[TraceRow]:
        return self.rows[-1] if self.rows else None

    def column(self, name: str) -> List[Optional[float]]:
        return [getattr(row, name) for row in self.rows]

    def write_csv(self, path: str) -> None:
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(",".join(TRACE_HEADER) + "\n")
            for row in self.rows:
                cells = [str(row.iteration)] + [_cell(v) for v in row.values()]
                f.write(",".join(cells) + "\n")

    @classmethod
    def read_csv(cls, path: str) -> "TrainTrace":
        trace = cls()
        with open(path, 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()
        if not lines or tuple(lines[0].split(",")) != TRACE_HEADER:
            raise DatasetParseError("unexpected trace header", 1, path)
        for line_number, line in enumerate(lines[1:], start=2):
            cells = line.split(",")
            if len(cells) != len(TRACE_HEADER):
                raise DatasetParseError("wrong number of trace cells", line_number, path)
            try:
                trace.record(TraceRow(int(cells[0]), *(_parse(v) for v in cells[1:])))
            except ValueError as e:
                raise DatasetParseError(str(e), line_number, path)
        return trace


class TraceEvaluator:
    """Builds trace rows, adding estimation error and test accuracy when known."""

    def __init__(self, ground_truth=None, test_features=None, test_labels=None):
        self.ground_truth = ground_truth
        self.test_features = test_features
        self.test_labels = test_labels

    @classmethod
    def for_dataset(cls, dataset, ground_truth=None) -> "TraceEvaluator":
        if dataset.has_split("test"):
            features, labels = dataset.split_arrays("test")
            return cls(ground_truth, features, labels)
        return cls(ground_truth)

    def row(self, iteration: int, params, state=None, noisy_loss: Optional[float] = None,
            meta_loss: Optional[float] = None) -> TraceRow:
        est_error = None
        if self.ground_truth is not None and state is not None:
            est_error = estimation_error(self.ground_truth, state.matrix)
        test_acc = None
        if self.test_features is not None and len(self.test_labels) > 0:
            test_acc = accuracy(predict(params, self.test_features), self.test_labels)
        return TraceRow(iteration, noisy_loss, meta_loss, est_error, test_acc)
