"""Exception types shared across the library and mapped to CLI exit codes."""
from __future__ import annotations

__all__ = [
    "ValidationError",
    "ParseError",
    "SizeGuardError",
    "TheoremViolationError",
]


class ValidationError(ValueError):
    """A kernel or model violates one of its defining conditions.

    token names the violated condition for diagnostics and is one of
    "non-hermitian", "spectrum", "existence-bound", "param-bound",
    or "anchor".
    """

    def __init__(self, token: str, message: str):
        super().__init__(message)
        self.token = token


class ParseError(ValueError):
    """A kernel specification file could not be parsed."""


class SizeGuardError(ValueError):
    """An exact-law or coupling operation was requested beyond its size bound."""


class TheoremViolationError(RuntimeError):
    """A coupling that must exist was found infeasible.

    This cannot happen for a valid kernel; seeing it means a bug or a
    numerically broken input, so the full context is carried along.
    """

    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}
