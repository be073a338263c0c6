"""Process-wide configuration read from the environment, plus logging setup."""
from __future__ import annotations

import logging
import os

from rich.console import Console
from rich.logging import RichHandler

# 配置 (environment overrides; defaults are the desk-scale values)
LOG_LEVEL = os.getenv("AUCTIONS_LOG_LEVEL", "WARNING").upper()
WORKERS = max(1, int(os.getenv("AUCTIONS_WORKERS", "1")))
BUYER_CAP = int(os.getenv("AUCTIONS_BUYER_CAP", "1000000"))
SEARCH_HORIZON = float(os.getenv("AUCTIONS_SEARCH_HORIZON", "1e12"))

# Tolerances and grids.
REL_TOL = 1e-9
INTEGRAL_TOL = 1e-8
GRID_POINTS = 10_000
Y_MIN = 1e-6

# Bundle and brute-force caps.
BUNDLE_LIST_CAP = 64
BRUTE_FORCE_MAX_BUYERS = 12
BRUTE_FORCE_MAX_SPACE = 5**12

stderr_console = Console(stderr=True)


def configure_logging(level: str | int | None = None) -> None:
    """Route the package loggers through a RichHandler on stderr."""
    resolved = level if level is not None else LOG_LEVEL
    logging.basicConfig(
        level=resolved,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=stderr_console, rich_tracebacks=False, show_path=False)],
        force=True,
    )
