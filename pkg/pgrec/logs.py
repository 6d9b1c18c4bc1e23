"""stderr logging for the ``pgrec`` logger tree, driven by PGREC_LOG."""

from __future__ import annotations

import logging
import os
import sys

LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
_FORMAT = "%(asctime)s %(levelname)-5s %(name)s: %(message)s"


def configure_logging(level: str | None = None) -> logging.Logger:
    """Install a single stderr handler on the package logger.

    Safe to call repeatedly; the handler is replaced, not stacked.
    """
    name = (level or os.getenv("PGREC_LOG", "info")).strip().lower()
    logger = logging.getLogger("pgrec")
    for handler in list(logger.handlers):
        if getattr(handler, "_pgrec", False):
            logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(_FORMAT))
    handler._pgrec = True
    logger.addHandler(handler)
    logger.propagate = False

    if name not in LEVELS:
        logger.setLevel(logging.INFO)
        logger.warning("PGREC_LOG=%r not one of %s, using info", name, sorted(LEVELS))
    else:
        logger.setLevel(LEVELS[name])
    return logger
