from __future__ import annotations

import logging

from topo_flock.config import LOG_FORMAT


def configure_logging(level: int | str = logging.INFO) -> None:
    """Install a single stream handler on the package logger."""
    root = logging.getLogger("topo_flock")
    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
    root.setLevel(level)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.propagate = False
