"""
Logging configuration for command-line runs.

Library modules only ask for named loggers; handlers are installed here, by
the runner, into a directory below the run's output directory.
"""

import logging
import logging.config
from pathlib import Path
from typing import Any, Dict, Union

from .path_utils import ensure_directory_exists

LOG_FORMAT = '%(asctime)s [%(levelname)8s] %(name)s: %(message)s'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def build_logging_config(log_dir: Union[str, Path], debug_mode: bool = False) -> Dict[str, Any]:
    """
    Build the dictConfig mapping for a run.

    Args:
        log_dir: Directory receiving app.log and error.log
        debug_mode: If True, console and app log run at DEBUG level
    """
    log_dir = Path(log_dir)
    level = 'DEBUG' if debug_mode else 'INFO'

    return {
        'version': 1,
        'disable_existing_loggers': False,

        'formatters': {
            'standard': {
                'format': LOG_FORMAT,
                'datefmt': LOG_DATE_FORMAT,
            }
        },

        'handlers': {
            'console': {
                'class': 'logging.StreamHandler',
                'formatter': 'standard',
                'level': level,
            },

            'app_file': {
                'class': 'logging.handlers.RotatingFileHandler',
                'filename': str(log_dir / 'app.log'),
                'maxBytes': 10 * 1024 * 1024,  # 10MB
                'backupCount': 10,
                'formatter': 'standard',
                'level': level,
                'mode': 'a',
                'encoding': 'utf-8',
            },

            # Error-only log
            'error_file': {
                'class': 'logging.handlers.RotatingFileHandler',
                'filename': str(log_dir / 'error.log'),
                'maxBytes': 5 * 1024 * 1024,  # 5MB
                'backupCount': 5,
                'formatter': 'standard',
                'mode': 'a',
                'level': 'ERROR',
                'encoding': 'utf-8',
            }
        },

        'root': {
            'handlers': ['console', 'app_file', 'error_file'],
            'level': level,
        },
    }


def setup_logging(log_dir: Union[str, Path], debug_mode: bool = False) -> Path:
    """
    Install console and rotating file handlers.

    Args:
        log_dir: Directory for log files, created if missing
        debug_mode: If True, enables debug logging

    Returns:
        The log directory
    """
    log_dir = ensure_directory_exists(log_dir)
    logging.config.dictConfig(build_logging_config(log_dir, debug_mode))

    logger = logging.getLogger('fisher_lda')
    logger.info(f"Logging initialized. Debug mode: {debug_mode}")
    logger.info(f"Log directory: {log_dir}")
    return log_dir
