"""Shared fixtures."""

import logging

import pytest


@pytest.fixture(autouse=True)
def _reset_root_handlers():
    """Drop handlers installed by setup_logging during a test."""
    root = logging.getLogger()
    saved = list(root.handlers)
    yield
    for handler in list(root.handlers):
        if handler not in saved and type(handler) in (logging.StreamHandler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()
