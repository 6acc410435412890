"""Exception hierarchy for mixv. Each family maps onto one CLI exit code."""
from typing import Optional


class MixvError(Exception):
    """Base class for every error raised by the toolkit."""

    exit_code = 3
    kind = "error"


class InputError(MixvError, ValueError):
    """Malformed input: bad files, shape or alphabet mismatch, invalid parameters."""

    exit_code = 2
    kind = "input_error"


class NumericGuardError(MixvError, ArithmeticError):
    """A numeric limit or guard prevented the computation."""

    exit_code = 3
    kind = "numeric_error"


class EnumerationGuardError(NumericGuardError):
    """An enumeration would visit more configurations than the guard allows."""

    kind = "enumeration_guard"

    def __init__(self, message: str, guard: str, size: int, limit: int):
        super().__init__(message)
        self.guard = guard
        self.size = size
        self.limit = limit


class GadgetInfeasibleError(NumericGuardError):
    """The dummy-spin gadget needs |h0| or delta beyond the representable range."""

    kind = "gadget_infeasible"

    def __init__(self, message: str, required_h0: float, required_delta: float):
        super().__init__(message)
        self.required_h0 = required_h0
        self.required_delta = required_delta


class OracleError(NumericGuardError):
    """An oracle failed or returned an unusable estimate."""

    kind = "oracle_error"


class WitnessError(MixvError):
    """A NotEqual witness did not survive re-verification."""

    kind = "witness_error"


def error_details(error: MixvError) -> dict:
    """Machine-readable description of an error for JSON diagnostics."""
    details = {"kind": error.kind, "message": str(error)}
    if isinstance(error, EnumerationGuardError):
        details.update(guard=error.guard, size=error.size, limit=error.limit)
    elif isinstance(error, GadgetInfeasibleError):
        details.update(required_h0=error.required_h0,
                       required_delta=error.required_delta)
    return details


def exit_code_for(error: Optional[BaseException]) -> int:
    """Exit code contract: 2 for input errors, 3 for numeric/guard failures."""
    if isinstance(error, MixvError):
        return error.exit_code
    return 3
