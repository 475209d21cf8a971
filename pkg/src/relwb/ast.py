"""AST for the modeling language.

Nodes are plain mutable dataclasses compared by identity; use :func:`structure`
for structural comparison (it ignores spans and type annotations, so a model
and its re-parsed pretty-print compare equal). The type checker writes each
expression's relational type into ``rtype`` in place.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .diagnostics import Span

# Sig declaration kinds.
TOP = "top"
EXTENDS = "extends"
IN = "in"

# Multiplicities. "default" marks a sig without a size keyword; fields use
# "set" as their default.
MULT_DEFAULT = "default"
MULT_SET = "set"
MULT_ONE = "one"
MULT_LONE = "lone"
MULT_SOME = "some"

SIG_MULTS = (MULT_ONE, MULT_LONE, MULT_SOME)
FIELD_MULTS = (MULT_SET, MULT_ONE, MULT_LONE, MULT_SOME)

# Expression operators.
UNION = "+"
DIFF = "-"
INTERSECT = "&"
JOIN = "."
PRODUCT = "->"
CLOSURE = "^"
RCLOSURE = "*"
TRANSPOSE = "~"

# Formula operators.
AND = "&&"
OR = "||"
IMPLIES = "=>"
IFF = "<=>"
IN_OP = "in"
EQ_OP = "="

# Cardinality keywords shared by multiplicity formulas and quantifiers.
CARD_NO = "no"
CARD_SOME = "some"
CARD_LONE = "lone"
CARD_ONE = "one"
CARD_ALL = "all"

QUANTIFIERS = (CARD_ALL, CARD_SOME, CARD_NO, CARD_LONE, CARD_ONE)
MULT_FORMS = (CARD_NO, CARD_SOME, CARD_LONE, CARD_ONE)


@dataclass(eq=False)
class Node:
    span: Span


# --------------------------------------------------------------------------
# Expressions


@dataclass(eq=False)
class Expr(Node):
    # Filled in by the type checker; None until then.
    rtype: Optional["object"] = field(default=None, init=False, repr=False)


@dataclass(eq=False)
class Name(Expr):
    """Unresolved identifier, only present before name resolution."""

    name: str


@dataclass(eq=False)
class SigRef(Expr):
    name: str


@dataclass(eq=False)
class FieldRef(Expr):
    name: str


@dataclass(eq=False)
class VarRef(Expr):
    name: str


@dataclass(eq=False)
class UnaryExpr(Expr):
    op: str  # CLOSURE | RCLOSURE | TRANSPOSE
    operand: Expr


@dataclass(eq=False)
class BinaryExpr(Expr):
    op: str  # UNION | DIFF | INTERSECT | JOIN | PRODUCT
    left: Expr
    right: Expr


# --------------------------------------------------------------------------
# Formulas


@dataclass(eq=False)
class Formula(Node):
    pass


@dataclass(eq=False)
class MultFormula(Formula):
    card: str  # no | some | lone | one
    expr: Expr


@dataclass(eq=False)
class CompareFormula(Formula):
    op: str  # IN_OP | EQ_OP   (!in / != desugar to Not around these)
    left: Expr
    right: Expr


@dataclass(eq=False)
class NotFormula(Formula):
    sub: Formula


@dataclass(eq=False)
class BoolFormula(Formula):
    op: str  # AND | OR | IMPLIES | IFF
    left: Formula
    right: Formula


@dataclass(eq=False)
class QuantFormula(Formula):
    quant: str  # all | some | no | lone | one
    decls: tuple[tuple[str, Expr], ...]  # flattened (var name, domain) pairs
    body: Formula


@dataclass(eq=False)
class ConstFormula(Formula):
    """Fixed truth value. Not part of the surface language; built
    internally when a query needs the negation of an empty goal."""

    value: bool


# --------------------------------------------------------------------------
# Declarations


@dataclass(eq=False)
class FieldDecl(Node):
    name: str
    owner: str
    mult: str  # set | one | lone | some; ternary fields are always "set"
    cols: tuple[str, ...]  # non-owner column sigs: (target,) or (mid, target)
    col_spans: tuple[Span, ...] = ()  # spans of the column sig names, for diagnostics

    @property
    def arity(self) -> int:
        return 1 + len(self.cols)

    @property
    def col_sigs(self) -> tuple[str, ...]:
        """All column sigs including the owner."""
        return (self.owner, *self.cols)


@dataclass(eq=False)
class SigDecl(Node):
    name: str
    kind: str  # TOP | EXTENDS | IN
    parent: Optional[str]
    abstract: bool
    mult: str  # default | one | lone | some
    fields: tuple[FieldDecl, ...]
    parent_span: Optional[Span] = None


@dataclass(eq=False)
class FactDecl(Node):
    name: str
    auto_named: bool  # True when the source had `fact { ... }` with no name
    formulas: tuple[Formula, ...]


@dataclass(eq=False)
class PredDecl(Node):
    name: str
    formulas: tuple[Formula, ...]


@dataclass(eq=False)
class RunCmd(Node):
    pred: Optional[str]  # run by predicate name ...
    inline: Optional[tuple[Formula, ...]]  # ... or an inline formula block
    bound: int


@dataclass(eq=False)
class Model(Node):
    sigs: tuple[SigDecl, ...]
    facts: tuple[FactDecl, ...]
    preds: tuple[PredDecl, ...]
    commands: tuple[RunCmd, ...]
    source: str = ""


AnyNode = Union[Expr, Formula, FieldDecl, SigDecl, FactDecl, PredDecl, RunCmd, Model]


# --------------------------------------------------------------------------
# Structural comparison and traversal


def structure(node) -> object:
    """A nested-tuple key that ignores spans and type annotations.

    Two trees are structurally equal iff their keys are equal.
    """
    if node is None:
        return None
    if isinstance(node, (str, int, bool)):
        return node
    if isinstance(node, tuple):
        return tuple(structure(n) for n in node)
    if isinstance(node, Name):
        return ("name", node.name)
    if isinstance(node, SigRef):
        return ("sig", node.name)
    if isinstance(node, FieldRef):
        return ("field", node.name)
    if isinstance(node, VarRef):
        return ("var", node.name)
    if isinstance(node, UnaryExpr):
        return ("unary", node.op, structure(node.operand))
    if isinstance(node, BinaryExpr):
        return ("binary", node.op, structure(node.left), structure(node.right))
    if isinstance(node, MultFormula):
        return ("mult", node.card, structure(node.expr))
    if isinstance(node, CompareFormula):
        return ("cmp", node.op, structure(node.left), structure(node.right))
    if isinstance(node, NotFormula):
        return ("not", structure(node.sub))
    if isinstance(node, BoolFormula):
        return ("bool", node.op, structure(node.left), structure(node.right))
    if isinstance(node, QuantFormula):
        return (
            "quant",
            node.quant,
            tuple((n, structure(d)) for n, d in node.decls),
            structure(node.body),
        )
    if isinstance(node, ConstFormula):
        return ("const", node.value)
    if isinstance(node, FieldDecl):
        return ("fielddecl", node.name, node.owner, node.mult, node.cols)
    if isinstance(node, SigDecl):
        return (
            "sigdecl",
            node.name,
            node.kind,
            node.parent,
            node.abstract,
            node.mult,
            tuple(structure(f) for f in node.fields),
        )
    if isinstance(node, FactDecl):
        return ("fact", node.name, node.auto_named, tuple(structure(f) for f in node.formulas))
    if isinstance(node, PredDecl):
        return ("pred", node.name, tuple(structure(f) for f in node.formulas))
    if isinstance(node, RunCmd):
        return (
            "run",
            node.pred,
            None if node.inline is None else tuple(structure(f) for f in node.inline),
            node.bound,
        )
    if isinstance(node, Model):
        return (
            "model",
            tuple(structure(s) for s in node.sigs),
            tuple(structure(f) for f in node.facts),
            tuple(structure(p) for p in node.preds),
            tuple(structure(c) for c in node.commands),
        )
    raise TypeError(f"unexpected node: {node!r}")


def children(node) -> tuple:
    """Direct Expr/Formula children, for generic traversal."""
    if isinstance(node, UnaryExpr):
        return (node.operand,)
    if isinstance(node, BinaryExpr):
        return (node.left, node.right)
    if isinstance(node, MultFormula):
        return (node.expr,)
    if isinstance(node, CompareFormula):
        return (node.left, node.right)
    if isinstance(node, NotFormula):
        return (node.sub,)
    if isinstance(node, BoolFormula):
        return (node.left, node.right)
    if isinstance(node, QuantFormula):
        return tuple(d for _, d in node.decls) + (node.body,)
    return ()


def walk(node):
    """Pre-order traversal of an Expr/Formula tree."""
    yield node
    for child in children(node):
        yield from walk(child)


def free_vars(node, bound: frozenset[str] = frozenset()) -> set[str]:
    if isinstance(node, VarRef):
        return set() if node.name in bound else {node.name}
    if isinstance(node, QuantFormula):
        out: set[str] = set()
        inner = set(bound)
        for name, domain in node.decls:
            out |= free_vars(domain, frozenset(inner))
            inner.add(name)
        out |= free_vars(node.body, frozenset(inner))
        return out
    out = set()
    for child in children(node):
        out |= free_vars(child, bound)
    return out


def model_formulas(model: Model):
    """All (owner kind, owner name, formula) triples in declaration order."""
    for fact in model.facts:
        for f in fact.formulas:
            yield "fact", fact.name, f
    for pred in model.preds:
        for f in pred.formulas:
            yield "pred", pred.name, f
    for cmd in model.commands:
        if cmd.inline is not None:
            for f in cmd.inline:
                yield "run", cmd.pred or "", f
