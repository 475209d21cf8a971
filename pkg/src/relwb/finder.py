"""Bounded instance enumeration and differential categorization.

The search is exhaustive and deterministic. Candidates stream in a fixed
canonical order: ascending sig cardinality vector (declaration order),
then atom subsets by index, then field tuple-set bitstrings, first tuple
slot most significant. No symmetry breaking; isomorphic instances appear
separately. Multiplicity keywords prune generation, which never changes
the order, only skips candidates that would fail checking anyway.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field as dc_field
from typing import ClassVar, Iterator, Optional, Sequence, Union

from . import ast
from .errors import Cancelled, ScopeTooLarge, StructuralMismatch
from .evaluate import eval_formula
from .instance import Instance, Universe, multiplicities_ok
from .typecheck import TypedModel

DEFAULT_BUDGET_BITS = 40

Goal = Union[ast.Formula, Sequence[ast.Formula], None]


@dataclass(frozen=True)
class Scope:
    default_bound: int = 3
    per_sig: dict = dc_field(default_factory=dict)

    def bound_for(self, sig: ast.SigDecl) -> int:
        if sig.mult == ast.MULT_ONE:
            return 1
        return max(0, int(self.per_sig.get(sig.name, self.default_bound)))


class CancelToken:
    """Cooperative cancellation flag, safe to set from another thread."""

    def __init__(self):
        self._event = threading.Event()

    def cancel(self):
        self._event.set()

    @property
    def cancelled(self) -> bool:
        return self._event.is_set()

    def raise_if_cancelled(self):
        if self._event.is_set():
            raise Cancelled()


def goal_formulas(goal: Goal) -> tuple[ast.Formula, ...]:
    if goal is None:
        return ()
    if isinstance(goal, ast.Formula):
        return (goal,)
    return tuple(goal)


def conjoin(formulas: Sequence[ast.Formula]) -> Optional[ast.Formula]:
    """Fold formulas into one; None for the empty (always true) case."""
    if not formulas:
        return None
    out = formulas[0]
    for f in formulas[1:]:
        out = ast.BoolFormula((out.span[0], f.span[1]), ast.AND, out, f)
    return out


def negate(formulas: Sequence[ast.Formula]) -> ast.Formula:
    conj = conjoin(formulas)
    if conj is None:
        # Negating an empty conjunction leaves an unsatisfiable query.
        return ast.ConstFormula((0, 0), False)
    return ast.NotFormula(conj.span, conj)


def universe_for(tm: TypedModel, scope: Scope) -> Universe:
    return Universe.from_scope(
        tm,
        default_bound=scope.default_bound,
        per_sig={
            s.name: scope.bound_for(s) for s in tm.model.sigs if s.kind == ast.TOP
        },
    )


def space_bits(tm: TypedModel, universe: Universe) -> int:
    """Upper bound on candidate-space size, as a bit count."""
    pool = {
        s.name: len(universe.atoms_of_top(tm.top_of(s.name))) for s in tm.model.sigs
    }
    bits = sum(pool.values())
    for fld in tm.fields.values():
        slots = pool[fld.owner]
        for col in fld.cols:
            slots *= pool[col]
        bits += slots
    return bits


def check_budget(tm: TypedModel, universe: Universe, budget_bits: int = DEFAULT_BUDGET_BITS):
    bits = space_bits(tm, universe)
    if bits > budget_bits:
        raise ScopeTooLarge(bits, budget_bits)


class SolutionCursor:
    """Streams the satisfying instances of one query, in canonical order."""

    def __init__(
        self,
        tm: TypedModel,
        formulas: tuple[ast.Formula, ...],
        universe: Universe,
        cancel: Optional[CancelToken] = None,
    ):
        self.tm = tm
        self.formulas = formulas
        self.universe = universe
        self.cancel = cancel
        self.position = 0
        self.exhausted = False
        self._iter = candidate_instances(tm, universe, cancel)

    def next(self) -> Optional[Instance]:
        if self.exhausted:
            return None
        for inst in self._iter:
            if all(eval_formula(inst, {}, f) for f in self.formulas):
                self.position += 1
                return inst
        self.exhausted = True
        return None

    def take(self, n: int) -> list[Instance]:
        out = []
        while len(out) < n:
            inst = self.next()
            if inst is None:
                break
            out.append(inst)
        return out

    def all(self) -> list[Instance]:
        out = []
        while True:
            inst = self.next()
            if inst is None:
                return out
            out.append(inst)


def enumerate_instances(
    tm: TypedModel,
    goal: Goal,
    scope: Scope = Scope(),
    cancel: Optional[CancelToken] = None,
    budget_bits: int = DEFAULT_BUDGET_BITS,
    universe: Optional[Universe] = None,
) -> SolutionCursor:
    """Cursor over instances satisfying facts, multiplicities and the goal."""
    if universe is None:
        universe = universe_for(tm, scope)
    check_budget(tm, universe, budget_bits)
    fact_fs = tuple(f for fact in tm.model.facts for f in fact.formulas)
    return SolutionCursor(tm, fact_fs + goal_formulas(goal), universe, cancel)


@dataclass
class CategoryStreams:
    """Four differential queries partitioning the fact-satisfying space."""

    stayed_valid: SolutionCursor
    became_valid: SolutionCursor
    stayed_invalid: SolutionCursor
    became_invalid: SolutionCursor

    KEYS: ClassVar[tuple[str, ...]] = (
        "stayedValid",
        "becameValid",
        "stayedInvalid",
        "becameInvalid",
    )

    def cursor(self, key: str) -> SolutionCursor:
        return {
            "stayedValid": self.stayed_valid,
            "becameValid": self.became_valid,
            "stayedInvalid": self.stayed_invalid,
            "becameInvalid": self.became_invalid,
        }[key]


def categorize(
    tm: TypedModel,
    old_goal: Goal,
    new_goal: Goal,
    scope: Scope = Scope(),
    cancel: Optional[CancelToken] = None,
    budget_bits: int = DEFAULT_BUDGET_BITS,
    universe: Optional[Universe] = None,
) -> CategoryStreams:
    if universe is None:
        universe = universe_for(tm, scope)
    check_budget(tm, universe, budget_bits)
    old_fs = goal_formulas(old_goal)
    new_fs = goal_formulas(new_goal)
    facts = tuple(f for fact in tm.model.facts for f in fact.formulas)

    def stream(*parts: tuple[ast.Formula, ...]) -> SolutionCursor:
        flat = facts + tuple(f for part in parts for f in part)
        return SolutionCursor(tm, flat, universe, cancel)

    neg_old = (negate(old_fs),)
    neg_new = (negate(new_fs),)
    return CategoryStreams(
        stayed_valid=stream(old_fs, new_fs),
        became_valid=stream(neg_old, new_fs),
        stayed_invalid=stream(neg_old, neg_new),
        became_invalid=stream(old_fs, neg_new),
    )


def is_representative(
    tm: TypedModel, inst: Instance, streams: CategoryStreams, category: str
) -> bool:
    """Constraint-check an instance against one category query, no search."""
    for name in inst.sig_sets:
        if name not in tm.sigs:
            raise StructuralMismatch(f"unknown sig '{name}' in instance")
    for name in inst.field_rels:
        if name not in tm.fields:
            raise StructuralMismatch(f"unknown field '{name}' in instance")
    if not multiplicities_ok(tm, inst):
        return False
    cursor = streams.cursor(category)
    return all(eval_formula(inst, {}, f) for f in cursor.formulas)


# --------------------------------------------------------------------------
# Candidate generation


def candidate_instances(
    tm: TypedModel, universe: Universe, cancel: Optional[CancelToken] = None
) -> Iterator[Instance]:
    """Every structurally valid instance, canonical order, mult-pruned."""
    assignments = sig_assignments(tm, universe)
    decl_order = [s.name for s in tm.model.sigs]

    def sort_key(assignment: dict) -> tuple:
        cards = tuple(len(assignment[name]) for name in decl_order)
        atoms = tuple(
            tuple(universe.rank(a) for a in universe.sort_atoms(assignment[name]))
            for name in decl_order
        )
        return (cards, atoms)

    fields = list(tm.fields.values())
    polls = 0
    for assignment in sorted(assignments, key=sort_key):
        owner_blocks = [_field_blocks(tm, universe, f, assignment) for f in fields]
        for choice in itertools.product(*(_block_product(b) for b in owner_blocks)):
            polls += 1
            if cancel is not None and polls % 1024 == 0:
                cancel.raise_if_cancelled()
            field_rels = {
                f.name: rel for f, rel in zip(fields, choice)
            }
            yield Instance(universe, assignment, field_rels)


def sig_assignments(tm: TypedModel, universe: Universe) -> list[dict]:
    """All hierarchy-consistent sig-set assignments (mult-pruned)."""
    tops = [s for s in tm.model.sigs if s.kind == ast.TOP]
    per_top: list[list[dict]] = []
    for top in tops:
        pool = universe.atoms_of_top(top.name)
        options = []
        for subset in _subsets(pool):
            options.extend(_assign_subtree(tm, top, frozenset(subset)))
        per_top.append(options)
    out = []
    for combo in itertools.product(*per_top):
        merged: dict = {}
        for part in combo:
            merged.update(part)
        out.append(merged)
    return out


def _subsets(pool: Sequence[str]) -> Iterator[tuple[str, ...]]:
    for mask in itertools.product((0, 1), repeat=len(pool)):
        yield tuple(a for a, bit in zip(pool, mask) if bit)


def _assign_subtree(
    tm: TypedModel, sig: ast.SigDecl, atoms: frozenset
) -> list[dict]:
    """Assignments for a sig and all transitive children, given its set."""
    if not _sig_card_ok(sig, len(atoms)):
        return []
    ext = [tm.sigs[c] for c in tm.children(sig.name, ast.EXTENDS)]
    sub = [tm.sigs[c] for c in tm.children(sig.name, ast.IN)]

    results = [{sig.name: atoms}]

    # extends children: each atom goes to one child, or stays unclaimed
    # unless the parent is abstract.
    if sig.abstract and not ext:
        # Abstract with no extending children admits no atoms.
        if atoms:
            return []
    elif ext:
        labels = list(range(len(ext)))
        if not sig.abstract:
            labels.append(None)
        ordered = sorted(atoms)
        split_choices = []
        for labelling in itertools.product(labels, repeat=len(ordered)):
            sets = [
                frozenset(a for a, tag in zip(ordered, labelling) if tag == i)
                for i in range(len(ext))
            ]
            split_choices.append(sets)
        expanded = []
        for base in results:
            for sets in split_choices:
                branches = [[base]]
                for child, child_atoms in zip(ext, sets):
                    branches.append(_assign_subtree(tm, child, child_atoms))
                for combo in itertools.product(*branches):
                    merged = {}
                    for part in combo:
                        merged.update(part)
                    expanded.append(merged)
        results = expanded
    # in children: any subset of the parent's set.
    for child in sub:
        expanded = []
        for base in results:
            for subset in _subsets(sorted(base[sig.name])):
                for child_part in _assign_subtree(tm, child, frozenset(subset)):
                    merged = dict(base)
                    merged.update(child_part)
                    expanded.append(merged)
        results = expanded
    return results


def _sig_card_ok(sig: ast.SigDecl, n: int) -> bool:
    if sig.mult == ast.MULT_ONE:
        return n == 1
    if sig.mult == ast.MULT_LONE:
        return n <= 1
    if sig.mult == ast.MULT_SOME:
        return n >= 1
    return True


def _field_blocks(
    tm: TypedModel, universe: Universe, fld: ast.FieldDecl, assignment: dict
) -> list[list[frozenset]]:
    """Per-owner-atom choices of image tuples, in canonical block order.

    The concatenation of one choice per owner, owners in atom order, walks
    the field's tuple-set bitstrings in ascending order.
    """
    owners = universe.sort_atoms(assignment.get(fld.owner, frozenset()))
    col_atoms = [
        universe.sort_atoms(assignment.get(col, frozenset())) for col in fld.cols
    ]
    blocks = []
    for owner in owners:
        slots = [
            (owner, *rest) for rest in itertools.product(*col_atoms)
        ]
        choices = []
        for mask in itertools.product((0, 1), repeat=len(slots)):
            n = sum(mask)
            if fld.arity == 2 and not _field_card_ok(fld.mult, n):
                continue
            choices.append(frozenset(t for t, bit in zip(slots, mask) if bit))
        blocks.append(choices)
    return blocks


def _field_card_ok(mult: str, n: int) -> bool:
    if mult == ast.MULT_ONE:
        return n == 1
    if mult == ast.MULT_LONE:
        return n <= 1
    if mult == ast.MULT_SOME:
        return n >= 1
    return True


def _block_product(blocks: list[list[frozenset]]) -> Iterator[frozenset]:
    if not blocks:
        yield frozenset()
        return
    for combo in itertools.product(*blocks):
        merged = frozenset().union(*combo)
        yield merged
