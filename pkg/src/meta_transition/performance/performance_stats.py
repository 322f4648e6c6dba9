"""Wall-time statistics per (phase, method)."""

import logging
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Dict, Iterator, Optional

import yaml


@dataclass
class PhaseStats:
    """Timings of one phase for one method."""
    phase: str
    method: str
    count: int = 0
    total_time: float = 0.0
    avg_time: float = 0.0
    min_time: float = float('inf')
    max_time: float = 0.0

    def add(self, seconds: float) -> None:
        self.count += 1
        self.total_time += seconds
        self.avg_time = self.total_time / self.count
        self.min_time = min(self.min_time, seconds)
        self.max_time = max(self.max_time, seconds)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            'phase': self.phase,
            'method': self.method,
            'count': self.count,
            'total_time': round(self.total_time, 3),
            'avg_time': round(self.avg_time, 3),
            'min_time': round(self.min_time, 3) if self.min_time != float('inf') else 0.0,
            'max_time': round(self.max_time, 3),
        }


class RunTimingStats:
    """Thread-safe collection of run timings.

    Disabled instances accept the same calls and record nothing, so callers
    never branch on the timing setting.
    """

    def __init__(self, enabled: bool = True):
        self.logger = logging.getLogger(__name__)
        self.enabled = enabled
        self.stats: Dict[str, PhaseStats] = {}
        self.start_time = time.time()
        self.lock = threading.Lock()

    def track(self, phase: str, method: str, seconds: float) -> None:
        """Record one timing."""
        if not self.enabled:
            return
        key = f"{phase}/{method}"
        with self.lock:
            if key not in self.stats:
                self.stats[key] = PhaseStats(phase=phase, method=method)
            self.stats[key].add(seconds)
        self.logger.debug("Tracked %s for %s: %.3fs", phase, method, seconds)

    @contextmanager
    def timed(self, phase: str, method: str) -> Iterator[Dict[str, Optional[float]]]:
        """Time the enclosed block; the yielded dict receives ``seconds``.

        ``seconds`` stays None when timing is disabled.
        """
        result: Dict[str, Optional[float]] = {'seconds': None}
        if not self.enabled:
            yield result
            return
        start = time.perf_counter()
        try:
            yield result
        finally:
            elapsed = time.perf_counter() - start
            result['seconds'] = elapsed
            self.track(phase, method, elapsed)

    def get_stats(self) -> Dict[str, Any]:
        with self.lock:
            return {
                'uptime_seconds': round(time.time() - self.start_time, 2),
                'start_time': datetime.fromtimestamp(self.start_time).isoformat(),
                'phases': [s.to_dict() for _, s in sorted(self.stats.items())],
            }

    def save_stats_to_file(self, filepath: str) -> None:
        """Save statistics to a YAML file; a no-op when disabled."""
        if not self.enabled:
            return
        stats_data = self.get_stats()
        stats_data['saved_at'] = datetime.now().isoformat()
        with open(filepath, 'w', encoding='utf-8') as f:
            yaml.dump(stats_data, f, default_flow_style=False, sort_keys=False)
        self.logger.info("Timing statistics saved to: %s", filepath)
