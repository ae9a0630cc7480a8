"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class DynMatchError(Exception):
    """Base class for all library errors."""


class GraphError(DynMatchError):
    pass


class DuplicateEdge(GraphError):
    pass


class MissingEdge(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class RangeError(GraphError):
    pass


class ParseError(DynMatchError):
    def __init__(self, line: int, message: str) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


class WitnessMissing(DynMatchError):
    pass


class DegenerateParams(DynMatchError):
    pass


class BatchOrder(DynMatchError):
    pass


class StepCapExceeded(DynMatchError):
    pass


class NotLeftRegular(DynMatchError):
    pass


class TooLarge(DynMatchError):
    pass


class BadWeights(DynMatchError):
    pass
