"""Printing round-trips: parse -> print -> parse preserves structure."""
import hypothesis.strategies as st
from hypothesis import given, settings

from relwb import ast, corpus
from relwb.parser import parse
from relwb.printer import pretty_print, print_expr, print_formula


def reparse(source):
    res = parse(source)
    assert res.model is not None, (source, res.diagnostics)
    return res.model


def test_corpus_round_trips():
    for name, src in corpus.MODELS.items():
        m = reparse(src)
        printed = pretty_print(m)
        m2 = reparse(printed)
        assert ast.structure(m2) == ast.structure(m), name
        # Printing is a fixed point after one pass.
        assert pretty_print(m2) == printed, name


def test_print_expr_minimal_parens():
    m = reparse("sig A { r: set A }\nfact F { some A.r + A.(r - r) }")
    e = m.facts[0].formulas[0].expr
    assert print_expr(e) == "A.r + A.(r - r)"


def test_print_formula_keeps_negation_sugar():
    m = reparse("sig A { r: set A }\nfact F { A !in A.r && A.r != A }")
    assert print_formula(m.facts[0].formulas[0]) == "A !in A.r && A.r != A"


def test_print_quantifier_groups():
    m = reparse("sig A {}\nsig B {}\nfact F { all x, y: A, z: B | x = y || z = z }")
    out = print_formula(m.facts[0].formulas[0])
    assert out == "all x, y: A, z: B | x = y || z = z"


def test_print_nested_quantifier():
    src = "sig A { r: set A }\nfact F { all x: A | some y: x.r | y in x.r }"
    m = reparse(src)
    assert print_formula(m.facts[0].formulas[0]) == (
        "all x: A | some y: x.r | y in x.r"
    )


# -- randomized round-trip -------------------------------------------------

SIGS = ("S0", "S1", "S2")
FIELDS = ("f0", "f1")
VARS = ("x", "y", "z")

HEADER = (
    "sig S0 { f0: set S0, f1: S0 -> S1 }\n"
    "sig S1 extends S0 {}\n"
    "sig S2 in S1 {}\n"
)


def exprs(depth, scope):
    base = st.sampled_from(SIGS + FIELDS + tuple(scope))
    if depth <= 0:
        return base
    sub = exprs(depth - 1, scope)
    unary = st.tuples(st.sampled_from(["^", "*", "~"]), sub).map(
        lambda t: f"{t[0]}({t[1]})"
    )
    binary = st.tuples(
        sub, st.sampled_from(["+", "-", "&", ".", "->"]), sub
    ).map(lambda t: f"({t[0]} {t[1]} {t[2]})")
    return st.one_of(base, unary, binary)


def formulas(depth, scope):
    leaf = st.one_of(
        st.tuples(st.sampled_from(["no", "some", "lone", "one"]), exprs(1, scope)).map(
            lambda t: f"{t[0]} {t[1]}"
        ),
        st.tuples(exprs(1, scope), st.sampled_from(["in", "=", "!in", "!="]), exprs(1, scope)).map(
            lambda t: f"{t[0]} {t[1]} {t[2]}"
        ),
    )
    if depth <= 0:
        return leaf
    sub = formulas(depth - 1, scope)
    composite = st.one_of(
        sub.map(lambda s: f"!({s})"),
        st.tuples(sub, st.sampled_from(["&&", "||", "=>", "<=>"]), sub).map(
            lambda t: f"({t[0]}) {t[1]} ({t[2]})"
        ),
    )
    if len(scope) < len(VARS):
        var = VARS[len(scope)]
        quant_body = formulas(depth - 1, scope + (var,))
        composite = st.one_of(
            composite,
            st.tuples(
                st.sampled_from(["all", "some", "no", "lone", "one"]),
                exprs(0, scope),
                quant_body,
            ).map(lambda t: f"{t[0]} {var}: {t[1]} | {t[2]}"),
        )
    return st.one_of(leaf, composite)


@settings(max_examples=120, deadline=None)
@given(formulas(3, ()))
def test_random_formula_round_trip(body):
    src = f"{HEADER}fact F {{ {body} }}"
    res = parse(src)
    assert res.model is not None, (src, res.diagnostics)
    printed = pretty_print(res.model)
    res2 = parse(printed)
    assert res2.model is not None, (printed, res2.diagnostics)
    assert ast.structure(res2.model) == ast.structure(res.model), (src, printed)
    assert pretty_print(res2.model) == printed
