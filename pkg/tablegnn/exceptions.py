"""
Exception hierarchy and exception handling helpers.
"""

from functools import wraps
from typing import Any

from loguru import logger


class TableGnnError(Exception):
    """Base error for tablegnn."""

    exit_code: int = 4

    def __init__(
        self,
        message: str,
        error_code: str | None = None,
        details: dict[str, Any] | None = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.__class__.__name__
        self.details = details or {}

    def to_dict(self) -> dict[str, Any]:
        """Dict form used for logs and the CLI error line."""
        return {
            "error_code": self.error_code,
            "message": self.message,
            "details": self.details,
        }


class InvalidInputError(TableGnnError):
    """Input rejected by a precondition (shape, length, range)."""

    exit_code = 2


class VocabularyError(InvalidInputError):
    """A label that is not in the vocabulary."""


class DataFormatError(TableGnnError):
    """A file could not be parsed; details carry path and line."""

    exit_code = 2


class ConfigurationError(TableGnnError):
    """Invalid configuration file or value."""

    exit_code = 2


class TrainingError(TableGnnError):
    """Training cannot start with the given data."""

    exit_code = 2


class JoinError(TableGnnError):
    """A column has no base-predictor logits."""

    exit_code = 3


class InvariantViolation(TableGnnError):
    """Internal invariant broken (non-finite values, split leakage)."""

    exit_code = 4


def handle_exception(
    exc: Exception,
    context: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """
    Log an exception and return its standardized error dict.

    Args:
        exc: the exception
        context: extra context merged into the log record

    Returns:
        dict with error_code, message and details
    """
    context = context or {}

    if isinstance(exc, TableGnnError):
        error_info = exc.to_dict()
    else:
        error_info = {
            "error_code": "UnexpectedError",
            "message": str(exc),
            "details": {
                "exception_type": type(exc).__name__,
                **context,
            },
        }

    logger.error(
        f"Exception occurred: {error_info['message']} | "
        + str(
            {
                "error_code": error_info["error_code"],
                "details": error_info["details"],
                **context,
            }
        ),
    )

    return error_info


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, TableGnnError):
        return exc.exit_code
    return 4


def with_exception_handling(operation_name: str, reraise: bool = True):
    """
    Decorator that logs failures of an operation.

    Args:
        operation_name: name recorded in the log context
        reraise: re-raise after logging; otherwise return {"error": ...}
    """

    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except Exception as exc:
                context = {
                    "operation": operation_name,
                    "function": func.__name__,
                }
                error_info = handle_exception(exc, context)
                if reraise:
                    raise
                return {"error": error_info}

        return wrapper

    return decorator
