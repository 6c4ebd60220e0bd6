"""Exception types shared across the package.

Every error carries a stable machine-readable ``code`` (the class name) so the
HTTP service and the CLI can map failures to wire-level error payloads without
string matching.
"""

from __future__ import annotations


class FlowlensError(Exception):
    """Base class for all package errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- ingest / parsing ---------------------------------------------------


class MalformedRecord(FlowlensError):
    """A line of input that cannot be parsed or violates its record schema."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateId(FlowlensError):
    pass


class UnknownParent(FlowlensError):
    pass


class CycleDetected(FlowlensError):
    pass


class MultipleRoots(FlowlensError):
    pass


class UnknownLabel(FlowlensError):
    def __init__(self, item_id: str, message: str):
        super().__init__(message)
        self.item_id = item_id


class InvalidDecision(FlowlensError):
    pass


class DuplicateItem(FlowlensError):
    pass


class CrossReferenceError(FlowlensError):
    """Raised by snapshot construction; lists every dangling reference."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


# --- analysis -----------------------------------------------------------


class UnknownCategory(FlowlensError):
    pass


class NoChildren(FlowlensError):
    pass


class UnknownFeature(FlowlensError):
    pass


class NotCategorical(FlowlensError):
    pass


class NotNumeric(FlowlensError):
    pass


class InsufficientData(FlowlensError):
    pass


class UnknownRun(FlowlensError):
    pass


# --- layout / rendering -------------------------------------------------


class EmptyFlow(FlowlensError):
    pass
