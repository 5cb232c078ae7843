"""Error taxonomy shared by every module."""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


class ArityError(ToolkitError):
    """A tuple, pattern or relation has the wrong length."""


class RangeError(ToolkitError):
    """An element, bound or index is outside the universe or otherwise malformed."""


class PreconditionError(ToolkitError):
    """A stated precondition of a construction does not hold.

    The message names the violated threshold so callers can report it.
    """


class BudgetExceededError(ToolkitError):
    """A search or enumeration would exceed the configured work budget."""

    def __init__(self, message: str, estimate: int | None = None, budget: int | None = None):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget


class ConstructionBugError(ToolkitError):
    """An internal invariant of a verified construction failed.

    Raised instead of returning an unverified object; indicates a bug in the
    construction (or an input outside its proven range), never a user error.
    """


class FormulaParseError(ToolkitError):
    """Formula text could not be parsed; carries a character position."""

    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class UnboundVariableError(ToolkitError):
    """Evaluation reached a variable with no binding in scope."""


class RelationFileError(ToolkitError):
    """A relation file is malformed; carries a line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
