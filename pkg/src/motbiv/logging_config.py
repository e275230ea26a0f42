"""Logging configuration module for motbiv."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

_LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

# 展開・パースの内部ログは DEBUG でも出さない
_QUIET_LOGGERS = ("sympy", "parsy")


def _resolve_level(level: str) -> int:
    value = logging.getLevelName(level.upper())
    return value if isinstance(value, int) else logging.INFO


def _attach(root: logging.Logger, handler: logging.Handler, level: int) -> None:
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(_LOG_FORMAT))
    root.addHandler(handler)


def setup_logging(*, level: str, log_file: str | None = None) -> None:
    """Send log records to stderr and, when ``log_file`` is set, to that file.

    Results are printed on stdout by the CLI, so logging never uses it.
    An unknown ``level`` falls back to INFO.
    """
    log_level = _resolve_level(level)
    root = logging.getLogger()
    root.setLevel(log_level)

    _attach(root, logging.StreamHandler(sys.stderr), log_level)
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        _attach(root, logging.FileHandler(log_path, encoding="utf-8"), log_level)

    for name in _QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
