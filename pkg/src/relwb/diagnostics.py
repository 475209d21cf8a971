"""Diagnostics and source spans shared across the compiler front end and service."""
from __future__ import annotations

from dataclasses import dataclass

# (start, end) byte offsets into the model source, end-exclusive.
Span = tuple[int, int]

ERROR = "error"
WARNING = "warning"

# Stable diagnostic codes surfaced over the wire.
SYNTAX_ERROR = "SYNTAX_ERROR"
TEMPORAL_UNSUPPORTED = "TEMPORAL_UNSUPPORTED"
NAME_UNRESOLVED = "NAME_UNRESOLVED"
DUPLICATE_NAME = "DUPLICATE_NAME"
HIERARCHY_CYCLE = "HIERARCHY_CYCLE"
ARITY_ERROR = "ARITY_ERROR"
TYPE_ERROR = "TYPE_ERROR"
VACUOUS_JOIN = "VACUOUS_JOIN"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    span: Span
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    def to_wire(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "span": list(self.span),
            "message": self.message,
        }


def error(code: str, span: Span, message: str) -> Diagnostic:
    return Diagnostic(ERROR, code, span, message)


def warning(code: str, span: Span, message: str) -> Diagnostic:
    return Diagnostic(WARNING, code, span, message)


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.is_error for d in diags)
