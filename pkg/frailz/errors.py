from __future__ import annotations

from typing import Iterable, Sequence, Tuple


class FrailzError(Exception):
    """Base class for every error the package raises on purpose."""

    exit_code = 4


class ValidationError(FrailzError, ValueError):
    """Bad input: data, flags, configuration or a numeric precondition."""

    exit_code = 2


class DataValidationError(ValidationError):
    """
    One or more CSV rows failed validation.

    Args:
        issues: ``(row_number, message)`` pairs; row numbers are 1-based data rows.
    """

    def __init__(self, issues: Iterable[Tuple[int, str]], source: str = "input") -> None:
        self.issues: Sequence[Tuple[int, str]] = tuple(issues)
        lines = [f"row {row}: {msg}" if row else msg for row, msg in self.issues]
        shown = "; ".join(lines[:10])
        more = f" (+{len(lines) - 10} more)" if len(lines) > 10 else ""
        super().__init__(f"{source}: {shown}{more}")


class NoEventsError(ValidationError):
    pass


class RankDeficientError(ValidationError):
    pass


class UnknownClusterError(ValidationError, KeyError):
    def __str__(self) -> str:
        return Exception.__str__(self)


class FoldPlanError(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class CalibrationError(ValidationError):
    pass


class ConvergenceError(FrailzError):
    """A fit stopped at its iteration limit."""

    exit_code = 3
