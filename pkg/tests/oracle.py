"""Independent reference implementations used only by the tests.

Everything here is deliberately written against the documented behavior
with different algorithms from the package: evaluation uses plain set
comprehensions and a BFS closure, candidate materialization enumerates
subsets per sig and filters hierarchy rules afterwards instead of
generating them constructively. Keeping the two code paths dissimilar is
the point; agreement between them is what the tests check.
"""
from __future__ import annotations

import itertools
from collections import deque

from relwb import ast
from relwb.instance import Instance


# --------------------------------------------------------------------------
# Naive evaluation


def naive_expr(inst, env, e):
    if isinstance(e, ast.SigRef):
        return {(a,) for a in inst.sig_set(e.name)}
    if isinstance(e, ast.FieldRef):
        return set(inst.field_rel(e.name))
    if isinstance(e, ast.VarRef):
        return {(env[e.name],)}
    if isinstance(e, ast.UnaryExpr):
        v = naive_expr(inst, env, e.operand)
        if e.op == ast.TRANSPOSE:
            return {(b, a) for (a, b) in v}
        closed = _bfs_closure(v)
        if e.op == ast.CLOSURE:
            return closed
        sigs = {s for p in e.operand.rtype.products for s in p}
        atoms = set()
        for s in sigs:
            atoms |= inst.sig_set(s)
        return closed | {(a, a) for a in atoms}
    if isinstance(e, ast.BinaryExpr):
        l = naive_expr(inst, env, e.left)
        r = naive_expr(inst, env, e.right)
        if e.op == ast.UNION:
            return l | r
        if e.op == ast.DIFF:
            return l - r
        if e.op == ast.INTERSECT:
            return l & r
        if e.op == ast.PRODUCT:
            return {p + q for p in l for q in r}
        if e.op == ast.JOIN:
            return {p[:-1] + q[1:] for p in l for q in r if p[-1] == q[0]}
    raise AssertionError(type(e))


def _bfs_closure(pairs):
    succ: dict = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    out = set()
    for start in succ:
        seen = set()
        frontier = deque(succ[start])
        while frontier:
            node = frontier.popleft()
            if node in seen:
                continue
            seen.add(node)
            frontier.extend(succ.get(node, ()))
        out |= {(start, node) for node in seen}
    return out


def naive_formula(inst, env, f):
    if isinstance(f, ast.ConstFormula):
        return f.value
    if isinstance(f, ast.MultFormula):
        n = len(naive_expr(inst, env, f.expr))
        return {
            ast.CARD_NO: n == 0,
            ast.CARD_SOME: n >= 1,
            ast.CARD_LONE: n <= 1,
            ast.CARD_ONE: n == 1,
        }[f.card]
    if isinstance(f, ast.CompareFormula):
        l = naive_expr(inst, env, f.left)
        r = naive_expr(inst, env, f.right)
        return l <= r if f.op == ast.IN_OP else l == r
    if isinstance(f, ast.NotFormula):
        return not naive_formula(inst, env, f.sub)
    if isinstance(f, ast.BoolFormula):
        l = naive_formula(inst, env, f.left)
        r = naive_formula(inst, env, f.right)
        return {
            ast.AND: l and r,
            ast.OR: l or r,
            ast.IMPLIES: (not l) or r,
            ast.IFF: l == r,
        }[f.op]
    if isinstance(f, ast.QuantFormula):
        rank = inst.universe.rank
        domains = [
            (name, sorted((t[0] for t in naive_expr(inst, env, dom)), key=rank))
            for name, dom in f.decls
        ]
        hits = 0
        total = 0
        for combo in itertools.product(*(atoms for _, atoms in domains)):
            inner = dict(env)
            inner.update(zip((n for n, _ in domains), combo))
            total += 1
            if naive_formula(inst, inner, f.body):
                hits += 1
        return {
            ast.CARD_ALL: hits == total,
            ast.CARD_NO: hits == 0,
            ast.CARD_SOME: hits >= 1,
            ast.CARD_LONE: hits <= 1,
            ast.CARD_ONE: hits == 1,
        }[f.quant]
    raise AssertionError(type(f))


# --------------------------------------------------------------------------
# Brute-force candidate materialization


def powerset(items):
    items = list(items)
    for mask in range(1 << len(items)):
        yield frozenset(x for i, x in enumerate(items) if mask >> i & 1)


def hierarchy_ok(tm, sets: dict) -> bool:
    for sig in tm.model.sigs:
        mine = sets[sig.name]
        if sig.kind != ast.TOP and not mine <= sets[sig.parent]:
            return False
        ext = tm.children(sig.name, ast.EXTENDS)
        if sig.abstract and mine != frozenset().union(*(sets[c] for c in ext)):
            return False
        for a, b in itertools.combinations(ext, 2):
            if sets[a] & sets[b]:
                return False
    return True


def sig_mults_ok(tm, sets: dict) -> bool:
    for sig in tm.model.sigs:
        n = len(sets[sig.name])
        if sig.mult == ast.MULT_ONE and n != 1:
            return False
        if sig.mult == ast.MULT_LONE and n > 1:
            return False
        if sig.mult == ast.MULT_SOME and n < 1:
            return False
    return True


def field_mults_ok(tm, inst: Instance) -> bool:
    for fld in tm.fields.values():
        if fld.arity != 2 or fld.mult == ast.MULT_SET:
            continue
        rel = inst.field_rel(fld.name)
        for owner in inst.sig_set(fld.owner):
            n = sum(1 for t in rel if t[0] == owner)
            if fld.mult == ast.MULT_ONE and n != 1:
                return False
            if fld.mult == ast.MULT_LONE and n > 1:
                return False
            if fld.mult == ast.MULT_SOME and n < 1:
                return False
    return True


def all_structural_instances(tm, universe):
    """Every hierarchy-consistent, well-typed instance. No mult filtering."""
    sig_names = [s.name for s in tm.model.sigs]
    pools = [
        sorted(universe.atoms_of_top(tm.top_of(name)), key=universe.rank)
        for name in sig_names
    ]
    out = []
    for combo in itertools.product(*(powerset(p) for p in pools)):
        sets = dict(zip(sig_names, combo))
        if not hierarchy_ok(tm, sets):
            continue
        field_spaces = []
        for fld in tm.fields.values():
            cols = [fld.owner, *fld.cols]
            slots = sorted(
                itertools.product(*(sorted(sets[c], key=universe.rank) for c in cols)),
                key=lambda t: tuple(universe.rank(a) for a in t),
            )
            field_spaces.append([frozenset(s) for s in powerset(slots)])
        for field_combo in itertools.product(*field_spaces):
            rels = dict(zip(tm.fields.keys(), field_combo))
            out.append(Instance(universe, sets, rels))
    return out


def satisfying_set(tm, universe, goal_formulas):
    """Brute-force: mult-valid structural instances where facts and the
    goal all hold under the naive evaluator."""
    fact_fs = [f for fact in tm.model.facts for f in fact.formulas]
    keep = []
    for inst in all_structural_instances(tm, universe):
        if not sig_mults_ok(tm, inst.sig_sets):
            continue
        if not field_mults_ok(tm, inst):
            continue
        if all(naive_formula(inst, {}, f) for f in fact_fs) and all(
            naive_formula(inst, {}, f) for f in goal_formulas
        ):
            keep.append(inst)
    return keep


def canonical_key(tm, universe, inst: Instance):
    """Documented enumeration order, stated directly as a sort key."""
    decl = [s.name for s in tm.model.sigs]
    cards = tuple(len(inst.sig_set(n)) for n in decl)
    atoms = tuple(
        tuple(sorted(universe.rank(a) for a in inst.sig_set(n))) for n in decl
    )
    bits = []
    for fld in tm.fields.values():
        cols = [fld.owner, *fld.cols]
        slots = sorted(
            itertools.product(
                *(sorted(inst.sig_set(c), key=universe.rank) for c in cols)
            ),
            key=lambda t: tuple(universe.rank(a) for a in t),
        )
        rel = inst.field_rel(fld.name)
        bits.append(tuple(1 if s in rel else 0 for s in slots))
    return (cards, atoms, tuple(bits))
