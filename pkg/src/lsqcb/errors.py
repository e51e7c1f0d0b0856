"""Exception hierarchy. Every error carries a short machine-readable ``code``."""

from __future__ import annotations


class LsqcbError(Exception):
    code = "error"

    def __init__(self, message: str, code: str | None = None) -> None:
        super().__init__(message)
        if code is not None:
            self.code = code


class ParseError(LsqcbError):
    code = "parse-error"


class MacroError(ParseError):
    code = "recursive-macro"


class SynthesisError(LsqcbError):
    code = "synthesis-provider-failure"


class AllocationError(LsqcbError):
    """Raised when a placement rule set cannot fit an element on the board."""

    code = "allocation-failure"

    def __init__(self, message: str, code: str | None = None, element: str | None = None) -> None:
        super().__init__(message, code)
        self.element = element


class ScheduleError(LsqcbError):
    code = "unschedulable"


class RoutingError(LsqcbError):
    code = "routing-failure"


class BindingError(RoutingError):
    code = "footprint-unsatisfiable"


class PackagingError(LsqcbError):
    code = "no-io"
