"""Text file formats: dataset CSV, transition CSV, checkpoints and run metadata.

Floats are written with 17 significant digits so every read of a written
file reproduces the in-memory values exactly.
"""

import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import yaml

from ..errors import DatasetParseError
from ..model.classifier import MlpParams
from .dataset import SPLITS, LabeledDataset

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
METADATA_SUFFIX = ".meta.yml"


def format_float(value: float) -> str:
    return FLOAT_FORMAT % value


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_dataset_csv(dataset: LabeledDataset, path: str) -> None:
    """Write ``f0..f{d-1},clean_label[,noisy_label],split``.

    The ``noisy_label`` column is present only for corrupted datasets.
    """
    _ensure_parent(path)
    header = [f"f{j}" for j in range(dataset.dim)] + ["clean_label"]
    if dataset.is_corrupted:
        header.append("noisy_label")
    header.append("split")
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(",".join(header) + "\n")
        for i in range(dataset.size):
            cells = [format_float(v) for v in dataset.features[i]]
            cells.append(str(int(dataset.clean_labels[i])))
            if dataset.is_corrupted:
                cells.append(str(int(dataset.noisy_labels[i])))
            cells.append(str(dataset.split[i]))
            f.write(",".join(cells) + "\n")
    logger.debug("Wrote %d rows to %s", dataset.size, path)


def _parse_header(header: List[str], path: str) -> tuple:
    if not header or header[-1] != "split":
        raise DatasetParseError("header must end with a 'split' column", 1, path)
    has_noisy = len(header) >= 2 and header[-2] == "noisy_label"
    label_col = len(header) - (3 if has_noisy else 2)
    if label_col < 1 or header[label_col] != "clean_label":
        raise DatasetParseError("header must contain feature columns and 'clean_label'", 1, path)
    expected = [f"f{j}" for j in range(label_col)]
    if header[:label_col] != expected:
        raise DatasetParseError(f"feature columns must be named {','.join(expected)}", 1, path)
    return label_col, has_noisy


def read_dataset_csv(path: str, num_classes: Optional[int] = None) -> LabeledDataset:
    """Read a dataset CSV written by :func:`write_dataset_csv`.

    Args:
        path: CSV path
        num_classes: Class count; taken from the metadata sidecar when
            present, otherwise ``max label + 1``

    Raises:
        OSError: If the file cannot be read
        DatasetParseError: On a malformed row, naming its line number
    """
    with open(path, 'r', encoding='utf-8') as f:
        lines = f.read().splitlines()
    if not lines:
        raise DatasetParseError("file is empty", 1, path)
    header = lines[0].strip().split(",")
    dim, has_noisy = _parse_header(header, path)

    features, clean, noisy, split = [], [], [], []
    for line_number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.strip().split(",")
        if len(cells) != len(header):
            raise DatasetParseError(
                f"expected {len(header)} cells, found {len(cells)}", line_number, path
            )
        try:
            row = [float(v) for v in cells[:dim]]
        except ValueError:
            raise DatasetParseError("non-numeric feature cell", line_number, path)
        if not all(np.isfinite(row)):
            raise DatasetParseError("non-finite feature cell", line_number, path)
        try:
            clean.append(int(cells[dim]))
            if has_noisy:
                noisy.append(int(cells[dim + 1]))
        except ValueError:
            raise DatasetParseError("label cells must be integers", line_number, path)
        tag = cells[-1].strip()
        if tag not in SPLITS:
            raise DatasetParseError(f"unknown split tag '{tag}'", line_number, path)
        features.append(row)
        split.append(tag)

    if num_classes is None:
        meta = read_metadata(metadata_path(path))
        num_classes = meta.get('num_classes') if meta else None
    labels = np.asarray(clean, dtype=np.int64)
    if num_classes is None:
        num_classes = int(max(labels.max(initial=0), max(noisy, default=0))) + 1
    try:
        return LabeledDataset(
            features=np.asarray(features, dtype=np.float64).reshape(len(features), dim),
            clean_labels=labels,
            split=np.asarray(split, dtype="<U5"),
            num_classes=int(num_classes),
            noisy_labels=np.asarray(noisy, dtype=np.int64) if has_noisy else None,
        )
    except ValueError as e:
        raise DatasetParseError(str(e), path=path)


def write_transition_csv(matrix, path: str) -> None:
    """``c`` lines of ``c`` comma-separated values, no header."""
    m = np.asarray(matrix, dtype=np.float64)
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        for row in m:
            f.write(",".join(format_float(v) for v in row) + "\n")


def read_transition_csv(path: str) -> np.ndarray:
    """Read a square matrix written by :func:`write_transition_csv`."""
    rows = _read_float_rows(path, start_line=1)
    if not rows:
        raise DatasetParseError("transition file is empty", 1, path)
    width = len(rows[0])
    if len(rows) != width:
        raise DatasetParseError(f"transition matrix must be square, got {len(rows)}x{width}",
                                path=path)
    return np.asarray(rows, dtype=np.float64)


def _read_float_rows(path: str, start_line: int, lines: Optional[Sequence[str]] = None
                     ) -> List[List[float]]:
    if lines is None:
        with open(path, 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()
    rows: List[List[float]] = []
    for offset, line in enumerate(lines):
        if not line.strip():
            continue
        line_number = start_line + offset
        try:
            row = [float(v) for v in line.strip().split(",")]
        except ValueError:
            raise DatasetParseError("non-numeric cell", line_number, path)
        if rows and len(row) != len(rows[0]):
            raise DatasetParseError(
                f"expected {len(rows[0])} values, found {len(row)}", line_number, path
            )
        rows.append(row)
    return rows


def save_checkpoint(params: MlpParams, path: str) -> None:
    """Write ``layer_dims d0,d1,...`` then every weight row, layer by layer."""
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write("layer_dims " + ",".join(str(d) for d in params.layer_dims) + "\n")
        for w in params.weights:
            for row in w:
                f.write(",".join(format_float(v) for v in row) + "\n")
    logger.debug("Saved checkpoint %s to %s", params.layer_dims, path)


def load_checkpoint(path: str) -> MlpParams:
    """Read a checkpoint written by :func:`save_checkpoint`."""
    with open(path, 'r', encoding='utf-8') as f:
        lines = f.read().splitlines()
    if not lines or not lines[0].startswith("layer_dims "):
        raise DatasetParseError("checkpoint must start with 'layer_dims'", 1, path)
    try:
        dims = [int(d) for d in lines[0][len("layer_dims "):].split(",")]
    except ValueError:
        raise DatasetParseError("layer_dims must be integers", 1, path)
    weights = []
    line = 1
    for i in range(len(dims) - 1):
        rows_needed = dims[i + 1]
        chunk = lines[line:line + rows_needed]
        if len(chunk) != rows_needed:
            raise DatasetParseError(f"checkpoint truncated in layer {i + 1}", path=path)
        rows = _read_float_rows(path, start_line=line + 1, lines=chunk)
        w = np.asarray(rows, dtype=np.float64)
        if w.shape != (dims[i + 1], dims[i]):
            raise DatasetParseError(
                f"layer {i + 1} has shape {w.shape}, expected {(dims[i + 1], dims[i])}",
                line + 1, path,
            )
        weights.append(w)
        line += rows_needed
    if any(l.strip() for l in lines[line:]):
        raise DatasetParseError("trailing data after the last layer", line + 1, path)
    return MlpParams(tuple(dims), tuple(weights))


def metadata_path(data_path: str) -> str:
    """Sidecar path ``<file>.meta.yml``."""
    return data_path + METADATA_SUFFIX


def write_metadata(path: str, metadata: Dict[str, Any]) -> None:
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(metadata, f, default_flow_style=False, sort_keys=False)


def read_metadata(path: str) -> Optional[Dict[str, Any]]:
    """Load a metadata sidecar; None when it doesn't exist."""
    if not os.path.exists(path):
        return None
    with open(path, 'r', encoding='utf-8') as f:
        return yaml.safe_load(f) or {}
