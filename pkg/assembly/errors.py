from typing import Any


class RampError(Exception):
    """Base error carrying a stable code plus free-form context."""

    def __init__(self, code: str, message: str, **context: Any):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message
        self.context = context


class GoalError(RampError):
    """Goal, catalog and layout parsing or validation failures."""


class IllegalEventError(RampError):
    def __init__(self, message: str, **context: Any):
        super().__init__("ILLEGAL_EVENT", message, **context)


class DescriptionError(RampError):
    """Problems in a system description: syntax, sorts, symbols."""


class GroundingError(RampError):
    pass


class TransitionError(RampError):
    """NOT_APPLICABLE, AMBIGUOUS_CLOSURE or INCONSISTENT."""


class PlanningError(RampError):
    pass


class SimulationError(RampError):
    pass


class HarnessError(RampError):
    pass


IO_CODES = frozenset({"MISSING_FILE", "IO_ERROR"})
