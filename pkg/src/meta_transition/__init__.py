"""meta-transition - learning label-noise transition matrices with meta data."""

__version__ = "0.1.0"
__author__ = "meta-transition developers"
__description__ = "Meta transition adaptation and baseline transition estimators"

from .config_manager import ConfigManager
from .errors import (
    MetaTransitionError,
    InvalidInputError,
    InvalidConfigError,
    ShapeError,
    CoverageError,
    DivergenceError,
    DatasetParseError,
)

__all__ = [
    "ConfigManager",
    "MetaTransitionError",
    "InvalidInputError",
    "InvalidConfigError",
    "ShapeError",
    "CoverageError",
    "DivergenceError",
    "DatasetParseError",
]
