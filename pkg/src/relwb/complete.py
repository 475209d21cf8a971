"""Type-directed completion for expression positions.

Candidates come from the type lattice alone: a continuation is offered
only when the extended expression's type has a non-empty column-tuple set,
so provably empty joins never appear. When an instance is supplied, every
suggestion carries the value the extended expression takes on it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import ast
from .errors import NoPrefixContext, StructuralMismatch, VacuousPrefix
from .evaluate import eval_expr
from .instance import Instance
from .typecheck import RelType, TypedModel, _TypeFailure

MAX_SUGGESTIONS = 20

AFTER_DOT = "after-dot"
AFTER_UNARY = "after-unary"


@dataclass
class Suggestion:
    insert_text: str
    full_expr: ast.Expr
    result_type: RelType
    annotated_value: Optional[frozenset]
    rank: int

    def to_wire(self, universe=None) -> dict:
        return {
            "text": self.insert_text,
            "type": render_type(self.result_type),
            "value": None
            if self.annotated_value is None
            else render_relation(self.annotated_value, universe),
        }


@dataclass
class SuggestResult:
    suggestions: list[Suggestion]
    truncated: bool


def render_type(rtype: RelType) -> str:
    if not rtype.products:
        return "{}"
    return " + ".join("->".join(p) for p in sorted(rtype.products))


def render_relation(rel: frozenset, universe=None) -> str:
    if not rel:
        return "{}"
    ordered = universe.sort_tuples(rel) if universe is not None else sorted(rel)
    return " + ".join("->".join(t) for t in ordered)


def suggest(
    tm: TypedModel,
    prefix: Optional[ast.Expr],
    cursor: str = AFTER_DOT,
    inst: Optional[Instance] = None,
    env_types: Optional[dict[str, RelType]] = None,
    env_atoms: Optional[dict[str, str]] = None,
    unary_op: str = ast.CLOSURE,
    limit: int = MAX_SUGGESTIONS,
) -> SuggestResult:
    """Ranked continuations for a cursor right after '.' or a unary op."""
    env_types = env_types or {}
    env_atoms = env_atoms or {}
    prefix_type = None
    if prefix is not None:
        prefix_type = _prefix_type(tm, prefix, env_types)
        if not prefix_type.products:
            raise VacuousPrefix(
                "the expression before the cursor is empty in every instance"
            )
    elif cursor == AFTER_DOT:
        raise NoPrefixContext("nothing to continue: no expression before '.'")

    if cursor == AFTER_DOT:
        candidates = _after_dot(tm, prefix, prefix_type)
    elif cursor == AFTER_UNARY:
        candidates = _after_unary(tm, prefix, prefix_type, unary_op)
    else:
        raise NoPrefixContext(f"unknown cursor mode '{cursor}'")

    suggestions = []
    for rank, (text, expr, rtype) in enumerate(candidates):
        value = _annotate(inst, env_atoms, expr)
        suggestions.append(Suggestion(text, expr, rtype, value, rank))
    return SuggestResult(suggestions[:limit], truncated=len(suggestions) > limit)


def reannotate(
    tm: TypedModel,
    suggestions: list[Suggestion],
    inst: Instance,
    env_atoms: Optional[dict[str, str]] = None,
) -> list[Suggestion]:
    """Same suggestions, values recomputed over a different instance."""
    for name in inst.sig_sets:
        if name not in tm.sigs:
            raise StructuralMismatch(f"unknown sig '{name}' in instance")
    for name in inst.field_rels:
        if name not in tm.fields:
            raise StructuralMismatch(f"unknown field '{name}' in instance")
    env_atoms = env_atoms or {}
    return [
        Suggestion(
            s.insert_text,
            s.full_expr,
            s.result_type,
            _annotate(inst, env_atoms, s.full_expr),
            s.rank,
        )
        for s in suggestions
    ]


def _annotate(
    inst: Optional[Instance], env_atoms: dict[str, str], expr: ast.Expr
) -> Optional[frozenset]:
    if inst is None:
        return None
    if not ast.free_vars(expr) <= set(env_atoms):
        return None
    return eval_expr(inst, env_atoms, expr)


def _prefix_type(
    tm: TypedModel, prefix: ast.Expr, env_types: dict[str, RelType]
) -> RelType:
    if prefix.rtype is not None:
        return prefix.rtype
    from .typecheck import _Checker

    try:
        t = _Checker(tm).check_expr(prefix, env_types)
    except KeyError as exc:
        raise NoPrefixContext(f"unbound variable {exc} before the cursor") from None
    if t is None:
        raise NoPrefixContext("the expression before the cursor does not type-check")
    return t


def _after_dot(tm: TypedModel, prefix: ast.Expr, ptype: RelType):
    """Fields first (closure variants tucked behind their base), sigs last."""
    out = []
    for name in sorted(tm.fields):
        base = tm.field_type(name)
        joined = _try_join(tm, ptype, base)
        if joined is not None and joined.products:
            out.append(_joined(tm, prefix, ast.FieldRef, name, None, joined))
        closure = _try_closure(tm, base)
        if closure is None:
            continue
        for op in (ast.CLOSURE, ast.RCLOSURE):
            ctype = closure if op == ast.CLOSURE else tm.closure_type(base, True)
            cjoined = _try_join(tm, ptype, ctype)
            if cjoined is not None and cjoined.products:
                out.append(_joined(tm, prefix, ast.FieldRef, name, op, cjoined))
    for name in sorted(tm.sigs):
        joined = _try_join(tm, ptype, tm.sig_type(name))
        if joined is not None and joined.products:
            out.append(_joined(tm, prefix, ast.SigRef, name, None, joined))
    return out


def _after_unary(
    tm: TypedModel, prefix: Optional[ast.Expr], ptype: Optional[RelType], op: str
):
    """Operand candidates for `^` / `*` / `~`, optionally joined onto a prefix."""
    out = []
    for name in sorted(tm.fields):
        base = tm.field_type(name)
        try:
            if op == ast.TRANSPOSE:
                otype = tm.transpose_type(base)
            else:
                otype = tm.closure_type(base, reflexive=op == ast.RCLOSURE)
        except _TypeFailure:
            continue
        if prefix is None:
            if otype.products:
                span = (0, 0)
                ref = ast.FieldRef(span, name)
                ref.rtype = base
                expr = ast.UnaryExpr(span, op, ref)
                expr.rtype = otype
                out.append((name, expr, otype))
            continue
        joined = _try_join(tm, ptype, otype)
        if joined is not None and joined.products:
            # the operator itself is already typed, so insert just the name
            out.append(_joined(tm, prefix, ast.FieldRef, name, op, joined, text=name))
    return out


def _joined(
    tm,
    prefix,
    ref_cls,
    name,
    unary: Optional[str],
    joined: RelType,
    text: Optional[str] = None,
):
    span = (prefix.span[1], prefix.span[1])
    ref = ref_cls(span, name)
    ref.rtype = tm.field_type(name) if ref_cls is ast.FieldRef else tm.sig_type(name)
    tail: ast.Expr = ref
    if unary is not None:
        tail = ast.UnaryExpr(span, unary, ref)
        tail.rtype = tm.closure_type(ref.rtype, reflexive=unary == ast.RCLOSURE)
    if text is None:
        text = name if unary is None else unary + name
    expr = ast.BinaryExpr((prefix.span[0], span[1]), ast.JOIN, prefix, tail)
    expr.rtype = joined
    return (text, expr, joined)


def _try_join(tm: TypedModel, left: RelType, right: RelType) -> Optional[RelType]:
    try:
        return tm.join_type(left, right)
    except _TypeFailure:
        return None


def _try_closure(tm: TypedModel, base: RelType) -> Optional[RelType]:
    try:
        return tm.closure_type(base, reflexive=False)
    except _TypeFailure:
        return None
