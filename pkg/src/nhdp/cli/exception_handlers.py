"""Exception handlers for the command line: map errors to exit codes."""

from typing import Callable, Dict, Type

from pydantic import ValidationError

from nhdp.cli import logger
from nhdp.common.exceptions import (
    ConfigException,
    DataException,
    NhdpException,
    StandardizationException,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

ExceptionHandler = Callable[[BaseException], int]

_handlers: Dict[Type[BaseException], ExceptionHandler] = {}


def _where(exc: BaseException) -> str:
    stage = getattr(exc, "stage", None)
    return f" (stage: {stage})" if stage else ""


def nhdp_exception_handler(exc: NhdpException) -> int:
    """Generic handler for all nhdp exceptions."""
    logger.error(f"Run failed{_where(exc)}: {exc}")
    return EXIT_RUNTIME


def config_exception_handler(exc: ConfigException) -> int:
    """Handler for missing or contradictory configuration."""
    logger.error(f"Invalid configuration{_where(exc)}: {exc}")
    return EXIT_USAGE


def validation_exception_handler(exc: ValidationError) -> int:
    """Handler for configuration that fails model validation."""
    logger.error(f"Invalid configuration: {exc}")
    return EXIT_USAGE


def data_exception_handler(exc: NhdpException) -> int:
    """Handler for input data that cannot be used."""
    logger.error(f"Invalid data{_where(exc)}: {exc}")
    return EXIT_DATA


def unexpected_exception_handler(exc: BaseException) -> int:
    """Handler for anything else."""
    logger.exception(f"Unexpected error: {exc}", exc_info=exc)
    return EXIT_RUNTIME


def add_exception_handler(exc_class: Type[BaseException], handler: ExceptionHandler) -> None:
    _handlers[exc_class] = handler


def register_exception_handlers() -> None:
    """Register all exception handlers of the command line."""
    add_exception_handler(Exception, unexpected_exception_handler)
    add_exception_handler(NhdpException, nhdp_exception_handler)
    add_exception_handler(ConfigException, config_exception_handler)
    add_exception_handler(ValidationError, validation_exception_handler)
    add_exception_handler(DataException, data_exception_handler)
    add_exception_handler(StandardizationException, data_exception_handler)


def handle_exception(exc: BaseException) -> int:
    """Run the handler of the most specific registered class and return its exit code."""
    if not _handlers:
        register_exception_handlers()
    for cls in type(exc).__mro__:
        if cls in _handlers:
            return _handlers[cls](exc)
    raise exc
