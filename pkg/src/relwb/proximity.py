"""Nearest-solution search and cross-instance formula diffing.

Distance between two instances over the same universe is plain Hamming
distance: the symmetric difference of every sig atom set plus every field
tuple set, summed. The nearest search keeps the constraints as hard and
minimizes that count exactly, scanning the bounded space in canonical
order so ties resolve deterministically.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

from . import ast
from .errors import StructuralMismatch
from .evaluate import eval_formula, eval_trace
from .finder import (
    DEFAULT_BUDGET_BITS,
    CancelToken,
    Goal,
    SolutionCursor,
    check_budget,
    goal_formulas,
    negate,
)
from .instance import Instance, multiplicities_ok, structural_violations
from .printer import print_formula
from .typecheck import TypedModel

VALID = "valid"
INVALID = "invalid"


def instance_distance(tm: TypedModel, a: Instance, b: Instance) -> int:
    """Tuples plus atoms present in exactly one of the two instances."""
    _check_pair(tm, a, b)
    total = 0
    for sig in tm.model.sigs:
        total += len(a.sig_set(sig.name) ^ b.sig_set(sig.name))
    for name in tm.fields:
        total += len(a.field_rel(name) ^ b.field_rel(name))
    return total


def default_goal(tm: TypedModel) -> tuple[ast.Formula, ...]:
    """Goal formulas of the model's first run command, if any."""
    for cmd in tm.model.commands:
        if cmd.pred is not None:
            return tuple(tm.preds[cmd.pred].formulas)
        if cmd.inline is not None:
            return tuple(cmd.inline)
        return ()
    return ()


def closest(
    tm: TypedModel,
    target: Instance,
    polarity: str,
    goal: Goal = None,
    cancel: Optional[CancelToken] = None,
    budget_bits: int = DEFAULT_BUDGET_BITS,
) -> Optional[Instance]:
    """The hard-constraint instance nearest to the target, or None.

    Hard constraints are the facts plus the goal (polarity "valid") or the
    facts plus the negated goal (polarity "invalid"). Minimality is exact;
    among equally near instances the first in canonical order wins. The
    search runs over the target's own atom pool.
    """
    if polarity not in (VALID, INVALID):
        raise ValueError(f"polarity must be '{VALID}' or '{INVALID}'")
    goal_fs = goal_formulas(goal) if goal is not None else default_goal(tm)
    facts = tuple(f for fact in tm.model.facts for f in fact.formulas)
    if polarity == VALID:
        query = facts + goal_fs
    else:
        query = facts + (negate(goal_fs),)

    # A target that already satisfies the query is its own answer.
    if (
        not structural_violations(tm, target)
        and multiplicities_ok(tm, target)
        and all(eval_formula(target, {}, f) for f in query)
    ):
        return target

    check_budget(tm, target.universe, budget_bits)
    cursor = SolutionCursor(tm, query, target.universe, cancel)
    best: Optional[Instance] = None
    best_d: Optional[int] = None
    while True:
        inst = cursor.next()
        if inst is None:
            return best
        d = instance_distance(tm, inst, target)
        if best_d is None or d < best_d:
            best, best_d = inst, d


# --------------------------------------------------------------------------
# Formula breakdown


@dataclass
class BindingDiff:
    bindings: dict[str, str]
    value_a: bool
    value_b: bool

    def to_wire(self) -> dict:
        return {
            "bindings": dict(self.bindings),
            "valueOnA": self.value_a,
            "valueOnB": self.value_b,
        }


@dataclass
class BreakdownRow:
    formula_id: str
    span: tuple[int, int]
    text: str
    value_a: bool
    value_b: bool
    per_binding: Optional[list[BindingDiff]] = None

    def to_wire(self) -> dict:
        out = {
            "id": self.formula_id,
            "span": list(self.span),
            "formula": self.text,
            "valueOnA": self.value_a,
            "valueOnB": self.value_b,
        }
        if self.per_binding is not None:
            out["perBinding"] = [p.to_wire() for p in self.per_binding]
        return out


@dataclass
class BreakdownReport:
    rows: list[BreakdownRow] = dc_field(default_factory=list)

    def to_wire(self) -> dict:
        return {"rows": [r.to_wire() for r in self.rows]}


def breakdown(
    tm: TypedModel,
    goal: Goal,
    a: Instance,
    b: Instance,
    goal_label: str = "goal",
) -> BreakdownReport:
    """Rows for every labeled formula that disagrees between two instances.

    Labeled formulas are the fact bodies, the goal formulas, and every
    closed quantified subformula inside them. Quantified rows carry the
    bindings whose body values disagree, evaluation never short-circuits.
    """
    _check_pair(tm, a, b)
    labeled: list[tuple[str, ast.Formula]] = []
    for fact in tm.model.facts:
        labeled.extend(_number(fact.name, fact.formulas))
    labeled.extend(_number(goal_label, goal_formulas(goal)))

    rows = []
    for label, f in labeled:
        entries = [(label, f)]
        for j, q in enumerate(_closed_quants(f)):
            if q is not f:
                entries.append((f"{label}:q{j}", q))
        for fid, sub in entries:
            row = _diff_row(fid, sub, a, b)
            if row is not None:
                rows.append(row)
    return BreakdownReport(rows)


def _number(label: str, formulas) -> list[tuple[str, ast.Formula]]:
    formulas = tuple(formulas)
    if len(formulas) == 1:
        return [(label, formulas[0])]
    return [(f"{label}[{i}]", f) for i, f in enumerate(formulas)]


def _closed_quants(f: ast.Formula) -> list[ast.QuantFormula]:
    """Quantified subformulas with no free variables, outermost first."""
    out = []

    def walk(node):
        if isinstance(node, ast.QuantFormula) and not ast.free_vars(node):
            out.append(node)
        for child in ast.children(node):
            walk(child)

    walk(f)
    return out


def _diff_row(
    fid: str, f: ast.Formula, a: Instance, b: Instance
) -> Optional[BreakdownRow]:
    trace_a = eval_trace(a, f)
    trace_b = eval_trace(b, f)
    if trace_a.value == trace_b.value:
        return None
    per_binding = None
    if isinstance(f, ast.QuantFormula):
        per_binding = _binding_diffs(f, a, b, trace_a, trace_b)
    return BreakdownRow(
        fid, f.span, print_formula(f), trace_a.value, trace_b.value, per_binding
    )


def _binding_diffs(
    f: ast.QuantFormula, a: Instance, b: Instance, trace_a, trace_b
) -> list[BindingDiff]:
    names = [name for name, _ in f.decls]

    def by_binding(trace) -> dict[tuple, bool]:
        return {
            tuple(child.bindings[n] for n in names): bool(child.value)
            for child in trace.children
        }

    on_a = by_binding(trace_a)
    on_b = by_binding(trace_b)
    merged = set(on_a) | set(on_b)
    rank = a.universe.rank
    diffs = []
    for key in sorted(merged, key=lambda t: tuple(rank(x) for x in t)):
        env = dict(zip(names, key))
        va = on_a[key] if key in on_a else eval_formula(a, env, f.body)
        vb = on_b[key] if key in on_b else eval_formula(b, env, f.body)
        if va != vb:
            diffs.append(BindingDiff(env, va, vb))
    return diffs


def _check_pair(tm: TypedModel, a: Instance, b: Instance):
    for inst in (a, b):
        for name in inst.sig_sets:
            if name not in tm.sigs:
                raise StructuralMismatch(f"unknown sig '{name}' in instance")
        for name in inst.field_rels:
            if name not in tm.fields:
                raise StructuralMismatch(f"unknown field '{name}' in instance")
    if a.universe != b.universe:
        raise StructuralMismatch("instances live in different universes")
