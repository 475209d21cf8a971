"""Live workbench for a small relational modeling language.

The package splits into a language core (lexer, parser, type checker,
printer), an exhaustive bounded evaluator and instance finder, completion
and nearest-instance analyses on top of them, and a session service that
exposes the whole loop over HTTP and a CLI.
"""

from .diagnostics import Diagnostic, Span
from .errors import (
    Cancelled,
    NoPrefixContext,
    ScopeTooLarge,
    SessionNotFound,
    StructuralMismatch,
    UnboundVariable,
    VacuousPrefix,
    WorkbenchError,
)
from .instance import Instance, Universe
from .typecheck import RelType, TypedModel, analyze, typecheck
from .parser import parse
from .finder import CancelToken, Scope, categorize, enumerate_instances
from .evaluate import check_instance, eval_expr, eval_formula, eval_trace
from .complete import suggest
from .proximity import breakdown, closest, instance_distance

__version__ = "0.1.0"

__all__ = [
    "Cancelled",
    "CancelToken",
    "Diagnostic",
    "Instance",
    "NoPrefixContext",
    "RelType",
    "Scope",
    "ScopeTooLarge",
    "SessionNotFound",
    "Span",
    "StructuralMismatch",
    "TypedModel",
    "UnboundVariable",
    "Universe",
    "VacuousPrefix",
    "WorkbenchError",
    "analyze",
    "breakdown",
    "categorize",
    "check_instance",
    "closest",
    "enumerate_instances",
    "eval_expr",
    "eval_formula",
    "eval_trace",
    "instance_distance",
    "parse",
    "suggest",
    "typecheck",
]
