"""Run timing statistics."""

from .performance_stats import PhaseStats, RunTimingStats

__all__ = ['PhaseStats', 'RunTimingStats']
