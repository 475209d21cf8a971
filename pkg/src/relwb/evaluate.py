"""Evaluation of expressions and formulas over finite instances.

Two modes. Black-box evaluation returns just the value and may short-circuit
boolean connectives. Trace mode records a node per AST node per visited
variable binding, never short-circuits, and lists quantifier bindings in
lexicographic atom order, so traces of two instances line up structurally.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Optional, Union

from . import ast
from .errors import StructuralMismatch, UnboundVariable
from .instance import Instance, multiplicities_ok
from .typecheck import TypedModel

Relation = frozenset[tuple[str, ...]]


def eval_expr(inst: Instance, env: dict[str, str], e: ast.Expr) -> Relation:
    if isinstance(e, ast.SigRef):
        return frozenset((a,) for a in inst.sig_set(e.name))
    if isinstance(e, ast.FieldRef):
        return inst.field_rel(e.name)
    if isinstance(e, ast.VarRef):
        if e.name not in env:
            raise UnboundVariable(f"variable '{e.name}' is not bound")
        return frozenset({(env[e.name],)})
    if isinstance(e, ast.UnaryExpr):
        v = eval_expr(inst, env, e.operand)
        if e.op == ast.TRANSPOSE:
            return frozenset(t[::-1] for t in v)
        closed = _transitive(v)
        if e.op == ast.CLOSURE:
            return closed
        return closed | _identity(inst, e.operand)
    if isinstance(e, ast.BinaryExpr):
        a = eval_expr(inst, env, e.left)
        b = eval_expr(inst, env, e.right)
        return _combine(e.op, a, b)
    raise AssertionError(type(e))


def _combine(op: str, a: Relation, b: Relation) -> Relation:
    if op == ast.UNION:
        return a | b
    if op == ast.DIFF:
        return a - b
    if op == ast.INTERSECT:
        return a & b
    if op == ast.PRODUCT:
        return frozenset(x + y for x in a for y in b)
    if op == ast.JOIN:
        by_head: dict[str, list[tuple[str, ...]]] = {}
        for y in b:
            by_head.setdefault(y[0], []).append(y[1:])
        return frozenset(
            x[:-1] + rest for x in a for rest in by_head.get(x[-1], ())
        )
    raise AssertionError(op)


def _transitive(rel: Relation) -> Relation:
    closed = set(rel)
    while True:
        step = {
            (x, z2)
            for x, z in closed
            for z1, z2 in rel
            if z == z1
        } - closed
        if not step:
            return frozenset(closed)
        closed |= step


def _identity(inst: Instance, operand: ast.Expr) -> Relation:
    # The identity part of *r covers atoms of the sigs in r's static type
    # columns, so Queue.head.*link reaches head atoms even with no links.
    rtype = operand.rtype
    if rtype is None:
        raise StructuralMismatch(
            "reflexive closure needs a type-annotated operand"
        )
    atoms: set[str] = set()
    for product in rtype.products:
        for sig_name in product:
            atoms |= inst.sig_set(sig_name)
    return frozenset((a, a) for a in atoms)


def eval_formula(inst: Instance, env: dict[str, str], f: ast.Formula) -> bool:
    if isinstance(f, ast.ConstFormula):
        return f.value
    if isinstance(f, ast.MultFormula):
        n = len(eval_expr(inst, env, f.expr))
        return _card_ok(f.card, n)
    if isinstance(f, ast.CompareFormula):
        a = eval_expr(inst, env, f.left)
        b = eval_expr(inst, env, f.right)
        return a <= b if f.op == ast.IN_OP else a == b
    if isinstance(f, ast.NotFormula):
        return not eval_formula(inst, env, f.sub)
    if isinstance(f, ast.BoolFormula):
        a = eval_formula(inst, env, f.left)
        if f.op == ast.AND:
            return a and eval_formula(inst, env, f.right)
        if f.op == ast.OR:
            return a or eval_formula(inst, env, f.right)
        if f.op == ast.IMPLIES:
            return (not a) or eval_formula(inst, env, f.right)
        return a == eval_formula(inst, env, f.right)
    if isinstance(f, ast.QuantFormula):
        hits = 0
        for binding in quant_bindings(inst, env, f):
            if eval_formula(inst, {**env, **binding}, f.body):
                hits += 1
            elif f.quant == ast.CARD_ALL:
                return False
            if f.quant == ast.CARD_SOME and hits >= 1:
                return True
            if f.quant == ast.CARD_NO and hits >= 1:
                return False
            if f.quant in (ast.CARD_LONE, ast.CARD_ONE) and hits > 1:
                return False
        if f.quant == ast.CARD_ALL:
            return True
        return _card_ok(f.quant, hits)
    raise AssertionError(type(f))


def _card_ok(card: str, n: int) -> bool:
    if card == ast.CARD_NO:
        return n == 0
    if card == ast.CARD_SOME:
        return n >= 1
    if card == ast.CARD_LONE:
        return n <= 1
    if card == ast.CARD_ONE:
        return n == 1
    raise AssertionError(card)


def quant_bindings(
    inst: Instance, env: dict[str, str], f: ast.QuantFormula
) -> list[dict[str, str]]:
    """All binding environments of a quantifier, in deterministic order.

    Domains are evaluated once, in the outer environment; earlier variables
    of the same quantifier are not visible in later domains. Atoms iterate
    in universe order, first variable outermost.
    """
    rank = inst.universe.rank
    domains = []
    for name, domain in f.decls:
        atoms = sorted((t[0] for t in eval_expr(inst, env, domain)), key=rank)
        domains.append((name, atoms))
    names = [name for name, _ in domains]
    return [
        dict(zip(names, combo))
        for combo in itertools.product(*(atoms for _, atoms in domains))
    ]


# --------------------------------------------------------------------------
# Trace mode


@dataclass
class TraceNode:
    """One evaluation event: an AST node's value under one binding."""

    span: tuple[int, int]
    kind: str  # "formula" or "expr"
    value: Union[bool, Relation]
    bindings: dict[str, str]
    children: list["TraceNode"] = dc_field(default_factory=list)
    domains: list["TraceNode"] = dc_field(default_factory=list)

    def to_wire(self, universe) -> dict:
        if self.kind == "formula":
            value = self.value
        else:
            value = [list(t) for t in universe.sort_tuples(self.value)]
        out = {
            "span": list(self.span),
            "kind": self.kind,
            "value": value,
            "bindings": dict(self.bindings),
            "children": [c.to_wire(universe) for c in self.children],
        }
        if self.domains:
            out["domains"] = [d.to_wire(universe) for d in self.domains]
        return out


def eval_trace(inst: Instance, f: ast.Formula) -> TraceNode:
    """Full evaluation tree of a closed formula; no short-circuiting."""
    return _trace_formula(inst, {}, f)


def _trace_formula(inst: Instance, env: dict[str, str], f: ast.Formula) -> TraceNode:
    if isinstance(f, ast.ConstFormula):
        return TraceNode(f.span, "formula", f.value, dict(env))
    if isinstance(f, ast.MultFormula):
        sub = _trace_expr(inst, env, f.expr)
        value = _card_ok(f.card, len(sub.value))
        return TraceNode(f.span, "formula", value, dict(env), [sub])
    if isinstance(f, ast.CompareFormula):
        a = _trace_expr(inst, env, f.left)
        b = _trace_expr(inst, env, f.right)
        value = a.value <= b.value if f.op == ast.IN_OP else a.value == b.value
        return TraceNode(f.span, "formula", value, dict(env), [a, b])
    if isinstance(f, ast.NotFormula):
        sub = _trace_formula(inst, env, f.sub)
        return TraceNode(f.span, "formula", not sub.value, dict(env), [sub])
    if isinstance(f, ast.BoolFormula):
        a = _trace_formula(inst, env, f.left)
        b = _trace_formula(inst, env, f.right)
        if f.op == ast.AND:
            value = a.value and b.value
        elif f.op == ast.OR:
            value = a.value or b.value
        elif f.op == ast.IMPLIES:
            value = (not a.value) or b.value
        else:
            value = a.value == b.value
        return TraceNode(f.span, "formula", value, dict(env), [a, b])
    if isinstance(f, ast.QuantFormula):
        domain_nodes = []
        seen: dict[int, TraceNode] = {}
        for _, domain in f.decls:
            if id(domain) not in seen:
                seen[id(domain)] = _trace_expr(inst, env, domain)
                domain_nodes.append(seen[id(domain)])
        children = []
        hits = 0
        bindings = quant_bindings(inst, env, f)
        for binding in bindings:
            child = _trace_formula(inst, {**env, **binding}, f.body)
            children.append(child)
            hits += bool(child.value)
        if f.quant == ast.CARD_ALL:
            value = hits == len(bindings)
        else:
            value = _card_ok(f.quant, hits)
        return TraceNode(f.span, "formula", value, dict(env), children, domain_nodes)
    raise AssertionError(type(f))


def _trace_expr(inst: Instance, env: dict[str, str], e: ast.Expr) -> TraceNode:
    children = [_trace_expr(inst, env, c) for c in ast.children(e)]
    if isinstance(e, ast.UnaryExpr):
        v = children[0].value
        if e.op == ast.TRANSPOSE:
            value = frozenset(t[::-1] for t in v)
        elif e.op == ast.CLOSURE:
            value = _transitive(v)
        else:
            value = _transitive(v) | _identity(inst, e.operand)
    elif isinstance(e, ast.BinaryExpr):
        value = _combine(e.op, children[0].value, children[1].value)
    else:
        value = eval_expr(inst, env, e)
    return TraceNode(e.span, "expr", value, dict(env), children)


# --------------------------------------------------------------------------
# Whole-instance checking


def check_instance(
    tm: TypedModel, inst: Instance, pred: Optional[str] = None
) -> tuple[bool, dict[str, bool]]:
    """Check facts, multiplicities and optionally one predicate.

    Returns the overall verdict plus the truth of every named fact and
    predicate individually.
    """
    for name in inst.sig_sets:
        if name not in tm.sigs:
            raise StructuralMismatch(f"unknown sig '{name}' in instance")
    for name in inst.field_rels:
        if name not in tm.fields:
            raise StructuralMismatch(f"unknown field '{name}' in instance")
    if pred is not None and pred not in tm.preds:
        raise StructuralMismatch(f"unknown predicate '{pred}'")

    per_formula: dict[str, bool] = {}
    for fact in tm.model.facts:
        per_formula[fact.name] = all(
            eval_formula(inst, {}, fm) for fm in fact.formulas
        )
    for p in tm.model.preds:
        per_formula[p.name] = all(eval_formula(inst, {}, fm) for fm in p.formulas)

    overall = multiplicities_ok(tm, inst)
    overall = overall and all(per_formula[fact.name] for fact in tm.model.facts)
    if pred is not None:
        overall = overall and per_formula[pred]
    return overall, per_formula
