# src/logs.py
# Handler setup for the command line. Library modules only call logging.getLogger(__name__).

from __future__ import annotations

import logging
import sys

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbosity: int = 0) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG

    root = logging.getLogger("src")
    root.setLevel(level)
    # idempotent: repeated CLI calls in one process (tests) must not stack handlers
    for h in list(root.handlers):
        if getattr(h, "_getzler", False):
            root.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._getzler = True
    root.addHandler(handler)
