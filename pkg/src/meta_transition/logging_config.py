"""Centralized logging configuration for meta-transition.

This module provides a unified logging setup that configures the console
handler (always on the diagnostic stream, stderr) and an optional file
handler based on the application configuration. All modules should use this
to ensure consistent logging behavior.
"""

import os
import logging
import sys
from typing import Optional, Dict, Any

DEFAULT_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(config: Optional[Dict[str, Any]] = None) -> None:
    """Setup logging configuration for the application.

    This function configures logging to output to stderr and, when a file is
    configured, to that file with the same format and level. It should be
    called once at application startup.

    Args:
        config: Configuration dictionary containing logging settings.
                Expected format:
                {
                    'logging': {
                        'level': 'INFO',  # DEBUG, INFO, WARNING, ERROR, CRITICAL
                        'format': '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                        'file': 'logs/meta_transition.log'  # or None
                    }
                }
                If None, uses default settings without a log file.
    """
    log_config = config.get('logging', {}) if config else {}
    log_level = str(log_config.get('level', 'INFO')).upper()
    log_format = log_config.get('format', DEFAULT_FORMAT)
    log_file = log_config.get('file')

    numeric_level = getattr(logging, log_level, logging.INFO)

    # Remove any existing handlers to avoid duplicates
    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    formatter = logging.Formatter(log_format)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    root_logger.setLevel(numeric_level)

    logger = logging.getLogger(__name__)
    logger.debug("Logging initialized - Level: %s, File: %s", log_level, log_file)


def enable_debug_logging() -> None:
    """Lower the root logger and every installed handler to DEBUG (``--verbose``)."""
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    for handler in root_logger.handlers:
        handler.setLevel(logging.DEBUG)
    root_logger.debug("Verbose logging enabled")
