#!/usr/bin/env python3
"""
Runtime Settings
Environment-driven defaults for worker pools, Gram tiling and logging
"""

import logging
import os

from errors import InvalidParameterError

DEFAULT_TILE_WIDTH = 256
DEFAULT_CORR_DUMP_CAP = 2000
DEFAULT_WORKERS = 1

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def _positive_int_env(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        raise InvalidParameterError(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise InvalidParameterError(f"{name} must be >= 1, got {value}")
    return value


def default_workers() -> int:
    """Worker count used when a caller does not pass one"""
    return _positive_int_env('COHERENCE_WORKERS', DEFAULT_WORKERS)


def tile_width() -> int:
    return _positive_int_env('COHERENCE_TILE_WIDTH', DEFAULT_TILE_WIDTH)


def corr_dump_cap() -> int:
    return _positive_int_env('COHERENCE_CORR_DUMP_CAP', DEFAULT_CORR_DUMP_CAP)


def setup_logging(level: str = None, log_file: str = None):
    """Setup logging configuration

    Console output always; a log file only when one is given or
    COHERENCE_LOG_FILE is set.
    """
    level_name = (level or os.environ.get('COHERENCE_LOG_LEVEL', 'INFO')).upper()
    numeric_level = getattr(logging, level_name, None)
    if not isinstance(numeric_level, int):
        raise InvalidParameterError(f"Unknown log level: {level_name}")

    handlers = [logging.StreamHandler()]
    log_file = log_file or os.environ.get('COHERENCE_LOG_FILE')
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=numeric_level,
        format=LOG_FORMAT,
        handlers=handlers,
        force=True
    )
    return logging.getLogger('coherence')
