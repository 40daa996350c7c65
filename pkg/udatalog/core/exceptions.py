"""
Error types raised by the interpreter.
"""
from typing import Any, List, Optional, Sequence, Tuple


class UDatalogError(Exception):
    """Base class for interpreter errors."""

    def __init__(self, message: str, error_code: str = "UDATALOG_ERROR"):
        self.message = message
        self.error_code = error_code
        super().__init__(self.message)


class ParseError(UDatalogError):
    """Syntax error with its source position."""

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        expected: Sequence[str] = (),
    ):
        self.line = line
        self.column = column
        self.expected = sorted(expected)
        if line is not None:
            message = f"{line}:{column}: {message}"
        if self.expected:
            message = f"{message} (expected one of: {', '.join(self.expected)})"
        super().__init__(message, "PARSE_ERROR")


class ProgramError(UDatalogError):
    """Well-formed text that does not describe a valid database."""

    def __init__(
        self,
        message: str,
        predicate: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ):
        self.predicate = predicate
        self.line = line
        self.column = column
        if line is not None:
            message = f"{line}:{column}: {message}"
        super().__init__(message, "PROGRAM_ERROR")


class NotStratifiableError(UDatalogError):
    """A dependency cycle goes through a negative edge."""

    def __init__(self, message: str, cycle: List[str], negative_edge: Tuple[str, str]):
        self.cycle = cycle
        self.negative_edge = negative_edge
        super().__init__(message, "NOT_STRATIFIABLE")


class SafetyViolationError(UDatalogError):
    """Goal is not admissible for the loaded rules."""

    def __init__(self, message: str, report: Any):
        self.report = report
        super().__init__(message, "SAFETY_VIOLATION")


class BoundExceededError(UDatalogError):
    """Unfolding did not reach a fixpoint within the step bound."""

    def __init__(self, message: str, steps: int):
        self.steps = steps
        super().__init__(message, "BOUND_EXCEEDED")


class MissingDefinitionError(UDatalogError):
    """A negated predicate has no completed definition to unfold against."""

    def __init__(self, predicate: str):
        self.predicate = predicate
        super().__init__(f"no completed definition for negated predicate {predicate}", "MISSING_DEFINITION")


class FixpointLimitError(UDatalogError):
    """A stratum kept growing past MAX_FIXPOINT_ROUNDS."""

    def __init__(self, stratum: int, rounds: int):
        self.stratum = stratum
        self.rounds = rounds
        super().__init__(f"stratum {stratum} did not converge after {rounds} rounds", "FIXPOINT_LIMIT")


class TransactionApplyError(UDatalogError):
    """Raised while applying updates; the EDB is left untouched."""

    def __init__(self, message: str):
        super().__init__(message, "APPLY_FAILED")
