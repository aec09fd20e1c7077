import sys
from typing import Optional

from loguru import logger

from fermichain.config import settings
from fermichain.constants import PATHS

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | <cyan>{name}</cyan>:"
    "<cyan>{function}</cyan>:<cyan>{line}</cyan> - "
    "<level>{message}</level>"
)


def setup_logging(level: Optional[str] = None):
    """
    Set up logging configuration using loguru.

    Diagnostics always go to stderr; stdout is reserved for datasets.

    Args:
        level (Optional[str]): Overrides settings.LOG_LEVEL when given.
    """
    level = (level or settings.LOG_LEVEL).upper()
    logger.remove()
    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level, colorize=True)

    if settings.LOG_TO_FILE:
        logger.add(
            PATHS["logs"] / "fermichain.log",
            rotation="10 MB",
            retention="1 week",
            compression="zip",
            format=(
                "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | "
                "{extra[command]}:{extra[seed]} | "
                "{name}:{function}:{line} - {message}"
            ),
            level=level,
        )
    logger.configure(extra={"command": "-", "seed": "-"})


def get_run_logger(command: str, seed: Optional[int]):
    """
    Return a logger bound to one experiment run.

    Records carry the subcommand and seed so the file log of several
    runs can be told apart.
    """
    return logger.bind(command=command, seed=seed if seed is not None else "-")
