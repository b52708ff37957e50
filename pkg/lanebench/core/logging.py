"""
Logging Setup
=============

Loguru sink configuration shared by the CLI and the campaign runner.
"""

import sys
from typing import Optional

from loguru import logger


CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"
)


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """
    Replace loguru's default sink with the bench's console sink.

    Args:
        level: Minimum level for the console sink
        log_file: Optional path of a rotating DEBUG-level file sink
    """
    logger.remove()
    logger.add(sys.stderr, colorize=True, format=CONSOLE_FORMAT, level=level)
    if log_file:
        logger.add(log_file, rotation="10 MB", retention="7 days", level="DEBUG")
