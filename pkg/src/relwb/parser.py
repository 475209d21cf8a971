"""Recursive-descent parser with error recovery, plus name resolution.

``parse`` runs the whole front half: tokenize, parse declarations, resolve
names. It never throws on bad input; failures come back as diagnostics and
recovery resumes at the next statement boundary (a closing ``}`` or the next
top-level declaration keyword), so one parse reports every syntax error it
can reach.

Temporal syntax (``var``, ``always``, primed relations, ...) is recognized
and rejected with a dedicated message: this language is the single-state
fragment only.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import ast
from .diagnostics import (
    Diagnostic,
    DUPLICATE_NAME,
    HIERARCHY_CYCLE,
    NAME_UNRESOLVED,
    SYNTAX_ERROR,
    Span,
    TEMPORAL_UNSUPPORTED,
    error,
    has_errors,
)
from .lexer import EOF, INT, KEYWORD, NAME, PRIME, SYMBOL, TEMPORAL, Token, tokenize

_DECL_STARTERS = ("abstract", "sig", "fact", "pred", "run")


class _ParseError(Exception):
    def __init__(self, diag: Diagnostic):
        self.diag = diag


@dataclass
class ParseResult:
    model: Optional[ast.Model]
    diagnostics: list[Diagnostic]
    comments: list[Span]

    @property
    def ok(self) -> bool:
        return self.model is not None


def parse(source: str) -> ParseResult:
    """Parse and name-resolve a model source text."""
    lexed = tokenize(source)
    p = _Parser(lexed.tokens, source)
    model = p.parse_model()
    diags = lexed.diagnostics + p.diags
    if not has_errors(diags):
        diags += _resolve(model)
    if has_errors(diags):
        return ParseResult(None, diags, lexed.comments)
    return ParseResult(model, diags, lexed.comments)


def parse_expression(source: str) -> tuple[Optional[ast.Expr], list[Diagnostic]]:
    """Parse a standalone expression snippet (names stay unresolved)."""
    lexed = tokenize(source)
    p = _Parser(lexed.tokens, source)
    try:
        expr = p.parse_expr()
        p.expect_eof()
    except _ParseError as e:
        return None, lexed.diagnostics + p.diags + [e.diag]
    diags = lexed.diagnostics + p.diags
    return (expr, diags) if not has_errors(diags) else (None, diags)


class _Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.pos = 0
        self.source = source
        self.diags: list[Diagnostic] = []
        self._anon_facts = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        i = min(self.pos + ahead, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at_eof(self) -> bool:
        return self.peek().kind == EOF

    def fail(self, span: Span, message: str, code: str = SYNTAX_ERROR):
        raise _ParseError(error(code, span, message))

    def check_temporal(self):
        tok = self.peek()
        if tok.kind == TEMPORAL:
            self.fail(
                tok.span,
                f"temporal keyword '{tok.text}' is not supported: "
                "models here describe a single state",
                TEMPORAL_UNSUPPORTED,
            )
        if tok.kind == PRIME:
            self.fail(
                tok.span,
                "primed relations are temporal syntax and are not supported: "
                "models here describe a single state",
                TEMPORAL_UNSUPPORTED,
            )

    def expect_sym(self, sym: str) -> Token:
        self.check_temporal()
        tok = self.peek()
        if tok.is_sym(sym):
            return self.advance()
        self.fail(tok.span, f"expected '{sym}', found {_describe(tok)}")

    def expect_kw(self, word: str) -> Token:
        self.check_temporal()
        tok = self.peek()
        if tok.is_kw(word):
            return self.advance()
        self.fail(tok.span, f"expected '{word}', found {_describe(tok)}")

    def expect_name(self, what: str = "a name") -> Token:
        self.check_temporal()
        tok = self.peek()
        if tok.kind == NAME:
            return self.advance()
        self.fail(tok.span, f"expected {what}, found {_describe(tok)}")

    def expect_eof(self):
        if not self.at_eof():
            tok = self.peek()
            self.fail(tok.span, f"expected end of input, found {_describe(tok)}")

    # -- declarations ------------------------------------------------------

    def parse_model(self) -> ast.Model:
        sigs: list[ast.SigDecl] = []
        facts: list[ast.FactDecl] = []
        preds: list[ast.PredDecl] = []
        commands: list[ast.RunCmd] = []
        start = self.peek().span[0]
        while not self.at_eof():
            try:
                tok = self.peek()
                if tok.is_kw("abstract", "sig") or (
                    tok.is_kw("one", "lone", "some") and self.peek(1).is_kw("sig")
                ):
                    sigs.append(self.parse_sig())
                elif tok.is_kw("fact"):
                    facts.append(self.parse_fact())
                elif tok.is_kw("pred"):
                    preds.append(self.parse_pred())
                elif tok.is_kw("run"):
                    commands.append(self.parse_run())
                else:
                    self.check_temporal()
                    self.fail(
                        tok.span,
                        f"expected 'sig', 'fact', 'pred' or 'run', found {_describe(tok)}",
                    )
            except _ParseError as e:
                self.diags.append(e.diag)
                self._sync_to_decl()
        end = self.peek().span[1]
        return ast.Model(
            (start, end), tuple(sigs), tuple(facts), tuple(preds), tuple(commands)
        )

    def _sync_to_decl(self):
        """Skip to the next plausible declaration start, balancing braces."""
        depth = 0
        while not self.at_eof():
            tok = self.peek()
            if tok.is_sym("{"):
                depth += 1
            elif tok.is_sym("}"):
                self.advance()
                if depth <= 1:
                    return
                depth -= 1
                continue
            elif depth == 0 and (
                tok.is_kw(*_DECL_STARTERS)
                or (tok.is_kw("one", "lone", "some") and self.peek(1).is_kw("sig"))
            ):
                return
            self.advance()

    def parse_sig(self) -> ast.SigDecl:
        start = self.peek().span[0]
        abstract = False
        mult = ast.MULT_DEFAULT
        if self.peek().is_kw("abstract"):
            self.advance()
            abstract = True
        if self.peek().is_kw("one", "lone", "some"):
            mult = self.advance().text
        self.expect_kw("sig")
        name = self.expect_name("a sig name").text
        kind = ast.TOP
        parent = None
        parent_span = None
        if self.peek().is_kw("extends") or self.peek().is_kw("in"):
            kind = self.advance().text
            ptok = self.expect_name("a parent sig name")
            parent, parent_span = ptok.text, ptok.span
        self.expect_sym("{")
        fields: list[ast.FieldDecl] = []
        if not self.peek().is_sym("}"):
            fields.append(self.parse_field(name))
            while self.peek().is_sym(","):
                self.advance()
                fields.append(self.parse_field(name))
        end = self.expect_sym("}").span[1]
        return ast.SigDecl(
            (start, end), name, kind, parent, abstract, mult, tuple(fields), parent_span
        )

    def parse_field(self, owner: str) -> ast.FieldDecl:
        name_tok = self.expect_name("a field name")
        self.expect_sym(":")
        mult = None
        if self.peek().is_kw("one", "lone", "some", "set"):
            mult = self.advance().text
        t1 = self.expect_name("a sig name")
        if self.peek().is_sym("->"):
            if mult is not None:
                self.fail(
                    self.peek().span,
                    "multiplicity keywords apply to binary fields only",
                )
            self.advance()
            t2 = self.expect_name("a sig name")
            return ast.FieldDecl(
                (name_tok.span[0], t2.span[1]),
                name_tok.text,
                owner,
                ast.MULT_SET,
                (t1.text, t2.text),
                (t1.span, t2.span),
            )
        return ast.FieldDecl(
            (name_tok.span[0], t1.span[1]),
            name_tok.text,
            owner,
            mult or ast.MULT_SET,
            (t1.text,),
            (t1.span,),
        )

    def parse_fact(self) -> ast.FactDecl:
        start = self.expect_kw("fact").span[0]
        if self.peek().kind == NAME:
            name = self.advance().text
            auto = False
        else:
            name = f"fact${self._anon_facts}"
            self._anon_facts += 1
            auto = True
        formulas, end = self.parse_block()
        return ast.FactDecl((start, end), name, auto, formulas)

    def parse_pred(self) -> ast.PredDecl:
        start = self.expect_kw("pred").span[0]
        name = self.expect_name("a predicate name").text
        formulas, end = self.parse_block()
        return ast.PredDecl((start, end), name, formulas)

    def parse_run(self) -> ast.RunCmd:
        start = self.expect_kw("run").span[0]
        pred = None
        inline = None
        if self.peek().is_sym("{"):
            inline, _ = self.parse_block()
        else:
            pred = self.expect_name("a predicate name").text
        self.expect_kw("for")
        self.check_temporal()
        tok = self.peek()
        if tok.kind != INT:
            self.fail(tok.span, f"expected a scope bound, found {_describe(tok)}")
        self.advance()
        return ast.RunCmd((start, tok.span[1]), pred, inline, int(tok.text))

    def parse_block(self) -> tuple[tuple[ast.Formula, ...], int]:
        self.expect_sym("{")
        formulas: list[ast.Formula] = []
        while not self.peek().is_sym("}") and not self.at_eof():
            formulas.append(self.parse_formula())
        end = self.expect_sym("}").span[1]
        return tuple(formulas), end

    # -- formulas ----------------------------------------------------------
    # Loosest binding first: <=> ; => ; || ; && ; ! ; atoms.

    def parse_formula(self) -> ast.Formula:
        left = self.parse_implies()
        while self.peek().is_sym("<=>"):
            self.advance()
            right = self.parse_implies()
            left = ast.BoolFormula((left.span[0], right.span[1]), ast.IFF, left, right)
        return left

    def parse_implies(self) -> ast.Formula:
        left = self.parse_or()
        if self.peek().is_sym("=>"):
            self.advance()
            right = self.parse_implies()  # right-associative
            return ast.BoolFormula((left.span[0], right.span[1]), ast.IMPLIES, left, right)
        return left

    def parse_or(self) -> ast.Formula:
        left = self.parse_and()
        while self.peek().is_sym("||") or self.peek().is_kw("or"):
            self.advance()
            right = self.parse_and()
            left = ast.BoolFormula((left.span[0], right.span[1]), ast.OR, left, right)
        return left

    def parse_and(self) -> ast.Formula:
        left = self.parse_not()
        while self.peek().is_sym("&&") or self.peek().is_kw("and"):
            self.advance()
            right = self.parse_not()
            left = ast.BoolFormula((left.span[0], right.span[1]), ast.AND, left, right)
        return left

    def parse_not(self) -> ast.Formula:
        tok = self.peek()
        if tok.is_sym("!") or tok.is_kw("not"):
            self.advance()
            sub = self.parse_not()
            return ast.NotFormula((tok.span[0], sub.span[1]), sub)
        return self.parse_formula_atom()

    def parse_formula_atom(self) -> ast.Formula:
        self.check_temporal()
        tok = self.peek()
        if tok.is_kw(*ast.QUANTIFIERS) and self._quant_ahead():
            return self.parse_quant()
        if tok.is_kw(*ast.MULT_FORMS):
            self.advance()
            expr = self.parse_expr()
            return ast.MultFormula((tok.span[0], expr.span[1]), tok.text, expr)
        if tok.is_sym("("):
            # Could be a parenthesized formula or a parenthesized expression
            # opening a comparison. Try the comparison first and fall back.
            cp = self.pos
            try:
                return self.parse_comparison()
            except _ParseError:
                self.pos = cp
            self.advance()
            inner = self.parse_formula()
            end = self.expect_sym(")").span[1]
            inner.span = (tok.span[0], end)
            return inner
        return self.parse_comparison()

    def _quant_ahead(self) -> bool:
        # quantifier ::= kw NAME (, NAME)* : ...  — anything else is a
        # multiplicity formula (`all` alone always quantifies).
        if self.peek().is_kw(ast.CARD_ALL):
            return True
        j = 1
        if self.peek(j).kind != NAME:
            return False
        j += 1
        while self.peek(j).is_sym(",") and self.peek(j + 1).kind == NAME:
            j += 2
        return self.peek(j).is_sym(":")

    def parse_quant(self) -> ast.QuantFormula:
        kw = self.advance()
        decls: list[tuple[str, ast.Expr]] = []
        while True:
            # Commas before the ':' extend this group's variable list;
            # a comma after the domain starts a fresh group.
            names = [self.expect_name("a variable name")]
            while self.peek().is_sym(","):
                self.advance()
                names.append(self.expect_name("a variable name"))
            self.expect_sym(":")
            domain = self.parse_expr()
            for n in names:
                decls.append((n.text, domain))
            if self.peek().is_sym(","):
                self.advance()
                continue
            break
        self.expect_sym("|")
        body = self.parse_formula()
        return ast.QuantFormula((kw.span[0], body.span[1]), kw.text, tuple(decls), body)

    def parse_comparison(self) -> ast.Formula:
        left = self.parse_expr()
        tok = self.peek()
        if tok.is_kw("in") or tok.is_sym("="):
            op = ast.IN_OP if tok.is_kw("in") else ast.EQ_OP
            self.advance()
            right = self.parse_expr()
            return ast.CompareFormula((left.span[0], right.span[1]), op, left, right)
        if tok.is_sym("!") and self.peek(1).is_kw("in"):
            self.advance()
            self.advance()
            right = self.parse_expr()
            span = (left.span[0], right.span[1])
            return ast.NotFormula(span, ast.CompareFormula(span, ast.IN_OP, left, right))
        if tok.is_sym("!="):
            self.advance()
            right = self.parse_expr()
            span = (left.span[0], right.span[1])
            return ast.NotFormula(span, ast.CompareFormula(span, ast.EQ_OP, left, right))
        self.fail(tok.span, f"expected 'in' or '=', found {_describe(tok)}")

    # -- expressions -------------------------------------------------------
    # Loosest binding first: + - ; & ; -> ; . ; unary ^ * ~ ; atoms.

    def parse_expr(self) -> ast.Expr:
        left = self.parse_meet()
        while self.peek().is_sym("+", "-"):
            op = self.advance().text
            right = self.parse_meet()
            left = ast.BinaryExpr((left.span[0], right.span[1]), op, left, right)
        return left

    def parse_meet(self) -> ast.Expr:
        left = self.parse_arrow()
        while self.peek().is_sym("&"):
            self.advance()
            right = self.parse_arrow()
            left = ast.BinaryExpr((left.span[0], right.span[1]), ast.INTERSECT, left, right)
        return left

    def parse_arrow(self) -> ast.Expr:
        left = self.parse_join()
        while self.peek().is_sym("->"):
            self.advance()
            right = self.parse_join()
            left = ast.BinaryExpr((left.span[0], right.span[1]), ast.PRODUCT, left, right)
        return left

    def parse_join(self) -> ast.Expr:
        left = self.parse_unary_expr()
        while self.peek().is_sym("."):
            self.advance()
            right = self.parse_unary_expr()
            left = ast.BinaryExpr((left.span[0], right.span[1]), ast.JOIN, left, right)
        return left

    def parse_unary_expr(self) -> ast.Expr:
        tok = self.peek()
        if tok.is_sym("^", "*", "~"):
            self.advance()
            operand = self.parse_unary_expr()
            return ast.UnaryExpr((tok.span[0], operand.span[1]), tok.text, operand)
        return self.parse_expr_atom()

    def parse_expr_atom(self) -> ast.Expr:
        self.check_temporal()
        tok = self.peek()
        if tok.kind == NAME:
            self.advance()
            if self.peek().kind == PRIME:
                self.check_temporal()
            return ast.Name(tok.span, tok.text)
        if tok.is_sym("("):
            self.advance()
            inner = self.parse_expr()
            end = self.expect_sym(")").span[1]
            inner.span = (tok.span[0], end)
            return inner
        self.fail(tok.span, f"expected an expression, found {_describe(tok)}")


def _describe(tok: Token) -> str:
    if tok.kind == EOF:
        return "end of input"
    return f"'{tok.text}'"


# --------------------------------------------------------------------------
# Name resolution


def _resolve(model: ast.Model) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    sigs: dict[str, ast.SigDecl] = {}
    fields: dict[str, ast.FieldDecl] = {}

    for sig in model.sigs:
        if sig.name in sigs:
            diags.append(error(DUPLICATE_NAME, sig.span, f"duplicate sig '{sig.name}'"))
        else:
            sigs[sig.name] = sig
    for sig in model.sigs:
        for fld in sig.fields:
            if fld.name in fields or fld.name in sigs:
                diags.append(
                    error(DUPLICATE_NAME, fld.span, f"duplicate name '{fld.name}'")
                )
            else:
                fields[fld.name] = fld
            for col, span in zip(fld.cols, fld.col_spans):
                if col not in sigs:
                    diags.append(error(NAME_UNRESOLVED, span, f"unknown sig '{col}'"))

    # Parent links and rooting: every non-top sig must reach a top sig.
    for sig in model.sigs:
        if sig.kind == ast.TOP:
            continue
        if sig.parent not in sigs:
            diags.append(
                error(
                    NAME_UNRESOLVED,
                    sig.parent_span or sig.span,
                    f"unknown parent sig '{sig.parent}'",
                )
            )
    for sig in model.sigs:
        seen = {sig.name}
        cur = sig
        while cur.kind != ast.TOP:
            parent = sigs.get(cur.parent or "")
            if parent is None:
                break
            if parent.name in seen:
                diags.append(
                    error(
                        HIERARCHY_CYCLE,
                        sig.span,
                        f"sig hierarchy cycle through '{sig.name}'",
                    )
                )
                break
            seen.add(parent.name)
            cur = parent

    named: set[str] = set()
    for owner in (*model.facts, *model.preds):
        if owner.name in named:
            diags.append(
                error(DUPLICATE_NAME, owner.span, f"duplicate formula block '{owner.name}'")
            )
        named.add(owner.name)

    preds = {p.name for p in model.preds}
    for cmd in model.commands:
        if cmd.pred is not None and cmd.pred not in preds:
            diags.append(
                error(NAME_UNRESOLVED, cmd.span, f"unknown predicate '{cmd.pred}'")
            )

    def resolve_expr(e: ast.Expr, scope: tuple[str, ...]) -> ast.Expr:
        if isinstance(e, ast.Name):
            if e.name in scope:
                return ast.VarRef(e.span, e.name)
            if e.name in fields:
                return ast.FieldRef(e.span, e.name)
            if e.name in sigs:
                return ast.SigRef(e.span, e.name)
            diags.append(error(NAME_UNRESOLVED, e.span, f"unknown name '{e.name}'"))
            return e
        if isinstance(e, ast.UnaryExpr):
            e.operand = resolve_expr(e.operand, scope)
            return e
        if isinstance(e, ast.BinaryExpr):
            e.left = resolve_expr(e.left, scope)
            e.right = resolve_expr(e.right, scope)
            return e
        return e

    def resolve_formula(f: ast.Formula, scope: tuple[str, ...]) -> ast.Formula:
        if isinstance(f, ast.MultFormula):
            f.expr = resolve_expr(f.expr, scope)
        elif isinstance(f, ast.CompareFormula):
            f.left = resolve_expr(f.left, scope)
            f.right = resolve_expr(f.right, scope)
        elif isinstance(f, ast.NotFormula):
            f.sub = resolve_formula(f.sub, scope)
        elif isinstance(f, ast.BoolFormula):
            f.left = resolve_formula(f.left, scope)
            f.right = resolve_formula(f.right, scope)
        elif isinstance(f, ast.QuantFormula):
            # Domains see only the enclosing scope, not sibling binders.
            # Variables declared as one group share a domain node; keep that
            # sharing so the printer can regroup them.
            resolved: dict[int, ast.Expr] = {}
            new_decls = []
            for n, d in f.decls:
                if id(d) not in resolved:
                    resolved[id(d)] = resolve_expr(d, scope)
                new_decls.append((n, resolved[id(d)]))
            f.decls = tuple(new_decls)
            inner = scope + tuple(n for n, _ in f.decls)
            f.body = resolve_formula(f.body, inner)
        return f

    for _, _, formula in ast.model_formulas(model):
        resolve_formula(formula, ())

    return diags


def resolve_expr_in_context(
    expr: ast.Expr,
    sig_names: set[str],
    field_names: set[str],
    var_names: set[str],
) -> tuple[ast.Expr, list[Diagnostic]]:
    """Resolve a standalone expression against known names (for completion)."""
    diags: list[Diagnostic] = []

    def go(e: ast.Expr) -> ast.Expr:
        if isinstance(e, ast.Name):
            if e.name in var_names:
                return ast.VarRef(e.span, e.name)
            if e.name in field_names:
                return ast.FieldRef(e.span, e.name)
            if e.name in sig_names:
                return ast.SigRef(e.span, e.name)
            diags.append(error(NAME_UNRESOLVED, e.span, f"unknown name '{e.name}'"))
            return e
        if isinstance(e, ast.UnaryExpr):
            e.operand = go(e.operand)
            return e
        if isinstance(e, ast.BinaryExpr):
            e.left = go(e.left)
            e.right = go(e.right)
            return e
        return e

    return go(expr), diags
