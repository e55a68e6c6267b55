from contextlib import contextmanager
from logging import Logger
import sys
import logging
from typing import Iterator

from nhdp.common.exceptions import NhdpException

# _get_level_names_mapping() is Python 3.11+; same mapping on older interpreters.
_get_level_names_mapping = getattr(
    logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel)
)


def config_logger(service_name: str, level: str = "INFO") -> Logger:
    # Validate logging level
    if level.upper() not in _get_level_names_mapping():
        raise ValueError(f"Logging level unknown: {level}")

    logging.basicConfig(
        level=level.upper(),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stdout)],
    )

    logger = logging.getLogger(service_name)

    return logger


def set_level(level: str) -> None:
    """Change the level of the root logger after start-up (e.g. from a CLI flag)."""
    if level.upper() not in _get_level_names_mapping():
        raise ValueError(f"Logging level unknown: {level}")
    logging.getLogger().setLevel(level.upper())


@contextmanager
def log_stage(logger: Logger, stage: str) -> Iterator[None]:
    """
    Log the start and the outcome of a pipeline stage.

    Any NhdpException escaping the block without a stage gets this stage
    attached, so the CLI can report where a run failed.

    Args:
        logger: The logger instance
        stage: Human readable stage name
    """
    logger.info(f"Stage: {stage}")
    try:
        yield
    except NhdpException as exc:
        if exc.stage is None:
            exc.stage = stage
        logger.error(f"Stage: {stage} - Status: failed")
        raise
    logger.info(f"Stage: {stage} - Status: done")
