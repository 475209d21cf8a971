"""Relational type checker.

Types track arity plus the set of possible sig-name column tuples, at sig
granularity. An empty column-tuple set means the expression is provably
empty in every instance; those expressions get a warning rather than an
error, since the evaluator handles them fine (they are just useless).

The checker annotates every expression node in place (``Expr.rtype``) and
returns a ``TypedModel`` that also carries the sig-hierarchy tables the
evaluator, the instance finder and the completion engine all need.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import ast
from .diagnostics import (
    ARITY_ERROR,
    Diagnostic,
    TYPE_ERROR,
    VACUOUS_JOIN,
    error,
    has_errors,
    warning,
)


@dataclass(frozen=True)
class RelType:
    """Arity plus possible column sig-name tuples."""

    arity: int
    products: frozenset[tuple[str, ...]]

    @property
    def vacuous(self) -> bool:
        return not self.products

    def column_sigs(self, col: int) -> frozenset[str]:
        return frozenset(p[col] for p in self.products)


def unary_type(sig_name: str) -> RelType:
    return RelType(1, frozenset({(sig_name,)}))


@dataclass
class TypecheckResult:
    typed: Optional["TypedModel"]
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return self.typed is not None


class TypedModel:
    """A resolved model plus hierarchy tables and per-node types."""

    def __init__(self, model: ast.Model):
        self.model = model
        self.diagnostics: list[Diagnostic] = []
        self.sigs: dict[str, ast.SigDecl] = {s.name: s for s in model.sigs}
        self.fields: dict[str, ast.FieldDecl] = {
            f.name: f for s in model.sigs for f in s.fields
        }
        self.preds: dict[str, ast.PredDecl] = {p.name: p for p in model.preds}
        # ancestor chain, self first, top sig last
        self._chain: dict[str, tuple[str, ...]] = {}
        for name in self.sigs:
            chain = [name]
            cur = self.sigs[name]
            while cur.kind != ast.TOP:
                chain.append(cur.parent)
                cur = self.sigs[cur.parent]
            self._chain[name] = tuple(chain)

    # -- hierarchy ---------------------------------------------------------

    def ancestors(self, name: str) -> tuple[str, ...]:
        """Ancestor chain of a sig, starting at the sig itself."""
        return self._chain[name]

    def top_of(self, name: str) -> str:
        return self._chain[name][-1]

    def is_ancestor_or_equal(self, anc: str, name: str) -> bool:
        return anc in self._chain[name]

    def compatible(self, a: str, b: str) -> bool:
        """Two sig names can share atoms when one contains the other."""
        return self.is_ancestor_or_equal(a, b) or self.is_ancestor_or_equal(b, a)

    def meet(self, a: str, b: str) -> Optional[str]:
        """The narrower of two compatible sig names, else None."""
        if self.is_ancestor_or_equal(a, b):
            return b
        if self.is_ancestor_or_equal(b, a):
            return a
        return None

    def children(self, name: str, kind: Optional[str] = None) -> list[str]:
        return [
            s.name
            for s in self.model.sigs
            if s.kind != ast.TOP
            and s.parent == name
            and (kind is None or s.kind == kind)
        ]

    def sig_type(self, name: str) -> RelType:
        return unary_type(name)

    def field_type(self, name: str) -> RelType:
        f = self.fields[name]
        return RelType(f.arity, frozenset({(f.owner, *f.cols)}))

    # -- type algebra ------------------------------------------------------

    def combine(self, op: str, left: RelType, right: RelType) -> RelType:
        """Type of a binary expression; raises _TypeFailure on arity faults."""
        if op in (ast.UNION, ast.DIFF, ast.INTERSECT):
            if left.arity != right.arity:
                raise _TypeFailure(
                    ARITY_ERROR,
                    f"'{op}' needs operands of equal arity, "
                    f"got {left.arity} and {right.arity}",
                )
            if op == ast.UNION:
                return RelType(left.arity, left.products | right.products)
            if op == ast.DIFF:
                return RelType(left.arity, left.products)
            prods = set()
            for p in left.products:
                for q in right.products:
                    cols = [self.meet(a, b) for a, b in zip(p, q)]
                    if all(c is not None for c in cols):
                        prods.add(tuple(cols))
            return RelType(left.arity, frozenset(prods))
        if op == ast.PRODUCT:
            return RelType(
                left.arity + right.arity,
                frozenset(p + q for p in left.products for q in right.products),
            )
        if op == ast.JOIN:
            return self.join_type(left, right)
        raise AssertionError(op)

    def join_type(self, left: RelType, right: RelType) -> RelType:
        arity = left.arity + right.arity - 2
        if arity == 0:
            raise _TypeFailure(
                ARITY_ERROR, "join of two unary expressions has no columns left"
            )
        prods = set()
        for p in left.products:
            for q in right.products:
                if self.compatible(p[-1], q[0]):
                    prods.add(p[:-1] + q[1:])
        return RelType(arity, frozenset(prods))

    def closure_type(self, operand: RelType, reflexive: bool) -> RelType:
        if operand.arity != 2:
            raise _TypeFailure(
                ARITY_ERROR,
                f"closure needs a binary operand, got arity {operand.arity}",
            )
        for s, t in operand.products:
            if not self.compatible(s, t):
                raise _TypeFailure(
                    ARITY_ERROR,
                    f"closure needs a homogeneous operand, but columns "
                    f"'{s}' and '{t}' never share atoms",
                )
        prods = set(operand.products)
        while True:
            extra = {
                (s, t2)
                for s, t in prods
                for t1, t2 in operand.products
                if self.compatible(t, t1)
            } - prods
            if not extra:
                break
            prods |= extra
        if reflexive:
            for p in operand.products:
                for s in p:
                    prods.add((s, s))
        return RelType(2, frozenset(prods))

    def transpose_type(self, operand: RelType) -> RelType:
        if operand.arity != 2:
            raise _TypeFailure(
                ARITY_ERROR,
                f"transpose needs a binary operand, got arity {operand.arity}",
            )
        return RelType(2, frozenset(p[::-1] for p in operand.products))


class _TypeFailure(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message


def typecheck(model: ast.Model) -> TypecheckResult:
    """Annotate every expression with a type; collect diagnostics."""
    tm = TypedModel(model)
    checker = _Checker(tm)
    for _, _, formula in ast.model_formulas(model):
        checker.check_formula(formula, {})
    diags = checker.diags
    if has_errors(diags):
        return TypecheckResult(None, diags)
    tm.diagnostics = diags
    return TypecheckResult(tm, diags)


def analyze(source: str):
    """Parse and typecheck in one step.

    Returns (TypedModel or None, diagnostics). The model is None whenever
    any error diagnostic was produced at either stage.
    """
    from .parser import parse

    pr = parse(source)
    if pr.model is None:
        return None, pr.diagnostics
    tr = typecheck(pr.model)
    return tr.typed, pr.diagnostics + tr.diagnostics


class _Checker:
    def __init__(self, tm: TypedModel):
        self.tm = tm
        self.diags: list[Diagnostic] = []

    def check_formula(self, f: ast.Formula, env: dict[str, RelType]):
        if isinstance(f, ast.MultFormula):
            self.check_expr(f.expr, env)
        elif isinstance(f, ast.CompareFormula):
            lt = self.check_expr(f.left, env)
            rt = self.check_expr(f.right, env)
            if lt is not None and rt is not None and lt.arity != rt.arity:
                self.diags.append(
                    error(
                        TYPE_ERROR,
                        f.span,
                        f"'{f.op}' needs operands of equal arity, "
                        f"got {lt.arity} and {rt.arity}",
                    )
                )
        elif isinstance(f, ast.NotFormula):
            self.check_formula(f.sub, env)
        elif isinstance(f, ast.BoolFormula):
            self.check_formula(f.left, env)
            self.check_formula(f.right, env)
        elif isinstance(f, ast.QuantFormula):
            inner = dict(env)
            for name, domain in f.decls:
                dt = self.check_expr(domain, env)
                if dt is None:
                    inner[name] = RelType(1, frozenset())
                    continue
                if dt.arity != 1:
                    self.diags.append(
                        error(
                            TYPE_ERROR,
                            domain.span,
                            f"quantifier domain must be a set of atoms, "
                            f"got arity {dt.arity}",
                        )
                    )
                    inner[name] = RelType(1, frozenset())
                else:
                    inner[name] = dt
            self.check_formula(f.body, inner)
        else:
            raise AssertionError(type(f))

    def check_expr(self, e: ast.Expr, env: dict[str, RelType]) -> Optional[RelType]:
        """Compute and annotate the node type; None after an arity fault."""
        t = self._expr_type(e, env)
        if t is not None:
            e.rtype = t
            if t.vacuous and not self._child_vacuous(e):
                self.diags.append(
                    warning(
                        VACUOUS_JOIN,
                        e.span,
                        "expression is empty in every instance",
                    )
                )
        return t

    def _child_vacuous(self, e: ast.Expr) -> bool:
        for child in ast.children(e):
            t = getattr(child, "rtype", None)
            if isinstance(t, RelType) and t.vacuous:
                return True
        return False

    def _expr_type(self, e: ast.Expr, env: dict[str, RelType]) -> Optional[RelType]:
        if isinstance(e, ast.SigRef):
            return self.tm.sig_type(e.name)
        if isinstance(e, ast.FieldRef):
            return self.tm.field_type(e.name)
        if isinstance(e, ast.VarRef):
            return env[e.name]
        if isinstance(e, ast.UnaryExpr):
            ot = self.check_expr(e.operand, env)
            if ot is None:
                return None
            try:
                if e.op == ast.TRANSPOSE:
                    return self.tm.transpose_type(ot)
                return self.tm.closure_type(ot, reflexive=e.op == ast.RCLOSURE)
            except _TypeFailure as tf:
                self.diags.append(error(tf.code, e.span, tf.message))
                return None
        if isinstance(e, ast.BinaryExpr):
            lt = self.check_expr(e.left, env)
            rt = self.check_expr(e.right, env)
            if lt is None or rt is None:
                return None
            try:
                return self.tm.combine(e.op, lt, rt)
            except _TypeFailure as tf:
                self.diags.append(error(tf.code, e.span, tf.message))
                return None
        raise AssertionError(type(e))
