"""Exception types shared across the toolkit."""

from __future__ import annotations


class MargincertError(Exception):
    """Base class for all toolkit-specific errors."""


class ParseError(MargincertError):
    """Malformed expression text.  Carries a 0-based character offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.reason = message
        self.offset = offset


class EvaluationError(MargincertError):
    """A response function could not produce a finite value.

    ``point`` holds the offending input (a coordinate tuple or a
    name-to-value mapping) when it is known.
    """

    def __init__(self, message: str, point=None):
        super().__init__(message)
        self.point = point


class ConfigError(MargincertError):
    """Invalid problem configuration or report payload."""


class BudgetExceededError(MargincertError):
    """An estimation method would exceed its evaluation budget."""


class DomainMismatchError(MargincertError):
    """Operands describe different box domains."""


class ZeroDiameterError(MargincertError):
    """The effective input count is undefined when every diameter is zero."""


class InconsistentEstimateError(MargincertError):
    """A diameter estimate contradicts other inputs (e.g. mean outside range)."""
