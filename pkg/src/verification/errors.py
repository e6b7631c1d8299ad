"""
Exception hierarchy. Each class carries the CLI exit code it maps to.
"""
from typing import Optional

from config import EXIT_DATA, EXIT_DEGENERATE, EXIT_USAGE


class VerificationError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = EXIT_DATA


class ParameterError(VerificationError, ValueError):
    """A numeric parameter or flag is outside its domain."""

    exit_code = EXIT_USAGE


class DataError(VerificationError):
    """Input data is missing, malformed, or too short."""

    exit_code = EXIT_DATA


class DegenerateStatisticError(VerificationError):
    """A statistic is undefined for the data (constant series, |gamma| = 1, ...)."""

    exit_code = EXIT_DEGENERATE

    def __init__(self, statistic: str, message: Optional[str] = None):
        self.statistic = statistic
        super().__init__(f"degenerate statistic {statistic}: {message or 'undefined'}")
