"""Sweep cell state with YAML persistence."""

import logging
import os
import threading
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

import yaml

from .results import CellKey


class CellStatus(Enum):
    """Sweep cell status enumeration."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    SKIPPED = "skipped"


def cell_name(key: CellKey) -> str:
    method, kind, rate, seed = key
    return f"{method}/{kind}/{rate:g}/{seed}"


class SweepStateManager:
    """Tracks the status of every sweep cell in a YAML file.

    The results CSV stays the source of truth for completed cells; the state
    file records what ran, what failed and why. Timestamps are written only
    when ``record_times`` is set, otherwise two identical sweeps leave
    byte-identical state files.
    """

    def __init__(self, state_file_path: Optional[str] = None, record_times: bool = True):
        """Initialize the sweep state manager.

        Args:
            state_file_path: Optional path of the YAML state file
            record_times: Stamp the state and its cells with wall-clock times
        """
        self.logger = logging.getLogger(__name__)
        self.state_file_path = state_file_path
        self.record_times = record_times
        self.lock = threading.Lock()
        self.state = self.load_state() or self.create_initial_state()

    def _now(self) -> Optional[str]:
        return datetime.now().isoformat() if self.record_times else None

    def create_initial_state(self) -> Dict[str, Any]:
        state: Dict[str, Any] = {
            'cells': {},
            'metadata': {'failed_cells': []},
        }
        if self.record_times:
            state['created_at'] = state['updated_at'] = self._now()
        return state

    def load_state(self) -> Optional[Dict[str, Any]]:
        """Load state from the YAML file, None when absent or unreadable."""
        path = self.state_file_path
        if not path or not os.path.exists(path):
            return None
        try:
            with open(path, 'r', encoding='utf-8') as f:
                state = yaml.safe_load(f)
            self.logger.debug("Loaded sweep state from %s", path)
            return state if isinstance(state, dict) and 'cells' in state else None
        except (OSError, yaml.YAMLError) as e:
            self.logger.error("Error loading sweep state from %s: %s", path, e)
            return None

    def save_state(self) -> bool:
        """Write the state file; returns False on failure."""
        if not self.state_file_path:
            return True
        with self.lock:
            if self.record_times:
                self.state['updated_at'] = self._now()
            try:
                parent = os.path.dirname(os.path.abspath(self.state_file_path))
                os.makedirs(parent, exist_ok=True)
                with open(self.state_file_path, 'w', encoding='utf-8') as f:
                    yaml.safe_dump(self.state, f, default_flow_style=False, indent=2)
                return True
            except OSError as e:
                self.logger.error("Error saving sweep state to %s: %s", self.state_file_path, e)
                return False

    def _cell(self, key: CellKey) -> Dict[str, Any]:
        name = cell_name(key)
        return self.state['cells'].setdefault(name, {
            'status': CellStatus.PENDING.value,
            'started_at': None,
            'completed_at': None,
            'error': None,
        })

    def get_status(self, key: CellKey) -> CellStatus:
        entry = self.state['cells'].get(cell_name(key))
        if entry is None:
            return CellStatus.PENDING
        try:
            return CellStatus(entry['status'])
        except (KeyError, ValueError):
            return CellStatus.PENDING

    def mark_running(self, key: CellKey) -> None:
        with self.lock:
            cell = self._cell(key)
            cell['status'] = CellStatus.RUNNING.value
            cell['started_at'] = self._now()
            cell['error'] = None

    def mark_completed(self, key: CellKey) -> None:
        with self.lock:
            cell = self._cell(key)
            cell['status'] = CellStatus.COMPLETED.value
            cell['completed_at'] = self._now()
            failed = self.state['metadata']['failed_cells']
            if cell_name(key) in failed:
                failed.remove(cell_name(key))

    def mark_failed(self, key: CellKey, error: str) -> None:
        with self.lock:
            cell = self._cell(key)
            cell['status'] = CellStatus.FAILED.value
            cell['completed_at'] = self._now()
            cell['error'] = error
            failed = self.state['metadata']['failed_cells']
            if cell_name(key) not in failed:
                failed.append(cell_name(key))
                failed.sort()

    def mark_skipped(self, key: CellKey, reason: str = "already in results") -> None:
        with self.lock:
            cell = self._cell(key)
            if cell['status'] != CellStatus.COMPLETED.value:
                cell['status'] = CellStatus.SKIPPED.value
                cell['error'] = f"Skipped: {reason}"

    def failed_cells(self) -> List[str]:
        return list(self.state['metadata']['failed_cells'])
