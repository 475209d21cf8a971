"""Source renderer for models.

The output re-parses to a structurally equal AST. Layout is canonical:
declarations in model order, two-space indent inside blocks, one formula
per line. Parentheses are inserted only where precedence demands them.
"""
from __future__ import annotations

from . import ast

# Looser operators get smaller numbers; atoms are highest.
_EXPR_PREC = {
    ast.UNION: 1,
    ast.DIFF: 1,
    ast.INTERSECT: 2,
    ast.PRODUCT: 3,
    ast.JOIN: 4,
}
_UNARY_PREC = 5
_ATOM_PREC = 6

_FORM_PREC = {
    ast.IFF: 1,
    ast.IMPLIES: 2,
    ast.OR: 3,
    ast.AND: 4,
}
_NOT_PREC = 5
_LEAF_PREC = 6


def pretty_print(model: ast.Model) -> str:
    out: list[str] = []
    for sig in model.sigs:
        out.append(_sig(sig))
    for fact in model.facts:
        head = "fact {" if fact.auto_named else f"fact {fact.name} {{"
        out.append(_block(head, fact.formulas))
    for pred in model.preds:
        out.append(_block(f"pred {pred.name} {{", pred.formulas))
    for cmd in model.commands:
        if cmd.pred is not None:
            out.append(f"run {cmd.pred} for {cmd.bound}")
        elif not cmd.inline:
            out.append(f"run {{}} for {cmd.bound}")
        else:
            body = "\n".join(f"  {print_formula(f)}" for f in cmd.inline)
            out.append(f"run {{\n{body}\n}} for {cmd.bound}")
    return "\n".join(out) + "\n" if out else ""


def _sig(sig: ast.SigDecl) -> str:
    parts = []
    if sig.abstract:
        parts.append("abstract")
    if sig.mult != ast.MULT_DEFAULT:
        parts.append(sig.mult)
    parts.append("sig")
    parts.append(sig.name)
    if sig.kind != ast.TOP:
        parts.append(sig.kind)
        parts.append(sig.parent)
    if not sig.fields:
        return " ".join(parts) + " {}"
    fields = ", ".join(_field(f) for f in sig.fields)
    return " ".join(parts) + " { " + fields + " }"


def _field(f: ast.FieldDecl) -> str:
    if f.arity == 3:
        return f"{f.name}: {f.cols[0]} -> {f.cols[1]}"
    return f"{f.name}: {f.mult} {f.cols[0]}"


def _block(head: str, formulas: tuple[ast.Formula, ...]) -> str:
    if not formulas:
        return head + "}"
    lines = "\n".join(f"  {print_formula(f)}" for f in formulas)
    return f"{head}\n{lines}\n}}"


def print_formula(f: ast.Formula) -> str:
    text, _ = _formula(f)
    return text


def print_expr(e: ast.Expr) -> str:
    text, _ = _expr(e)
    return text


def _formula(f: ast.Formula) -> tuple[str, int]:
    if isinstance(f, ast.ConstFormula):
        # Internal node; no surface syntax, shown for debugging only.
        return ("true" if f.value else "false"), _LEAF_PREC
    if isinstance(f, ast.MultFormula):
        return f"{f.card} {print_expr(f.expr)}", _LEAF_PREC
    if isinstance(f, ast.CompareFormula):
        return f"{print_expr(f.left)} {f.op} {print_expr(f.right)}", _LEAF_PREC
    if isinstance(f, ast.NotFormula):
        sub = f.sub
        # Negated comparisons read better in operator form.
        if isinstance(sub, ast.CompareFormula):
            neg = "!in" if sub.op == ast.IN_OP else "!="
            return f"{print_expr(sub.left)} {neg} {print_expr(sub.right)}", _LEAF_PREC
        return "!" + _child_formula(sub, _NOT_PREC, right=True), _NOT_PREC
    if isinstance(f, ast.BoolFormula):
        prec = _FORM_PREC[f.op]
        if f.op == ast.IMPLIES:
            left = _child_formula(f.left, prec, right=False)
            right = _child_formula(f.right, prec - 1, right=True)
        else:
            left = _child_formula(f.left, prec - 1, right=False)
            right = _child_formula(f.right, prec, right=True)
        return f"{left} {f.op} {right}", prec
    if isinstance(f, ast.QuantFormula):
        groups: list[str] = []
        prev_domain = None
        for name, domain in f.decls:
            if domain is prev_domain:
                groups[-1] = groups[-1].replace(":", f", {name}:", 1)
                continue
            groups.append(f"{name}: {print_expr(domain)}")
            prev_domain = domain
        body = print_formula(f.body)
        return f"{f.quant} {', '.join(groups)} | {body}", 0
    raise AssertionError(type(f))


def _child_formula(f: ast.Formula, floor: int, right: bool) -> str:
    text, prec = _formula(f)
    # A quantifier body swallows everything rightward, so anywhere but the
    # rightmost slot it must be fenced off.
    if isinstance(f, ast.QuantFormula) and not right:
        return f"({text})"
    if prec <= floor:
        return f"({text})"
    return text


def _expr(e: ast.Expr) -> tuple[str, int]:
    if isinstance(e, (ast.SigRef, ast.FieldRef, ast.VarRef, ast.Name)):
        return e.name, _ATOM_PREC
    if isinstance(e, ast.UnaryExpr):
        text, prec = _expr(e.operand)
        if prec < _UNARY_PREC:
            text = f"({text})"
        return e.op + text, _UNARY_PREC
    if isinstance(e, ast.BinaryExpr):
        prec = _EXPR_PREC[e.op]
        left = _child_expr(e.left, prec - 1)
        right = _child_expr(e.right, prec)
        sep = "" if e.op == ast.JOIN else " "
        return f"{left}{sep}{e.op}{sep}{right}", prec
    raise AssertionError(type(e))


def _child_expr(e: ast.Expr, floor: int) -> str:
    text, prec = _expr(e)
    if prec <= floor:
        return f"({text})"
    return text
