"""Error surface shared by the query evaluators."""

from __future__ import annotations


class ExecutionError(Exception):
    """Query failure with a message usable verbatim as retry feedback.

    phase is "bind" for structural problems detectable before reading any
    row, "evaluate" for data-dependent failures.
    """

    def __init__(self, message: str, phase: str = "evaluate"):
        super().__init__(message)
        self.message = message
        self.phase = phase
