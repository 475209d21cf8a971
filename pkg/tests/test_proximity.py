import hypothesis.strategies as st
import pytest
from hypothesis import given, settings

import oracle
from conftest import analyzed

from relwb import corpus
from relwb.errors import ScopeTooLarge, StructuralMismatch
from relwb.evaluate import eval_formula
from relwb.finder import Scope, enumerate_instances, universe_for
from relwb.instance import Instance, Universe
from relwb.proximity import (
    breakdown,
    closest,
    default_goal,
    instance_distance,
)

SELFREF = "sig A { r: set A }\nrun {} for 2"


def selfref_pair():
    tm = analyzed(SELFREF)
    return tm, universe_for(tm, Scope(default_bound=3))


# -- distance --------------------------------------------------------------


def test_distance_counts_symmetric_difference(lts_tm):
    a = corpus.lts_fault_instance(lts_tm, states=2, events=1)
    drop_one = Instance(
        a.universe,
        a.sig_sets,
        {"trans": frozenset({("State1", "Event0", "State0")})},
    )
    assert instance_distance(lts_tm, a, drop_one) == 1
    also_init = Instance(
        a.universe,
        dict(a.sig_sets, Init=frozenset()),
        drop_one.field_rels,
    )
    assert instance_distance(lts_tm, a, also_init) == 2


def test_distance_identity_and_symmetry(lts_tm):
    a = corpus.lts_fault_instance(lts_tm, states=2, events=1)
    b = Instance(a.universe, a.sig_sets, {"trans": frozenset()})
    assert instance_distance(lts_tm, a, a) == 0
    assert instance_distance(lts_tm, a, b) == instance_distance(lts_tm, b, a)


def test_distance_requires_shared_universe(lts_tm):
    a = corpus.lts_fault_instance(lts_tm, states=2, events=1)
    other = Universe.from_scope(lts_tm, per_sig={"State": 3, "Event": 1})
    b = Instance(other, {}, {})
    with pytest.raises(StructuralMismatch):
        instance_distance(lts_tm, a, b)


def test_distance_rejects_unknown_names(lts_tm):
    a = corpus.lts_fault_instance(lts_tm, states=2, events=1)
    b = Instance(a.universe, {"Ghost": frozenset()}, {})
    with pytest.raises(StructuralMismatch):
        instance_distance(lts_tm, a, b)


@st.composite
def selfref_instances(draw):
    tm, uni = selfref_pair()
    atoms = draw(st.frozensets(st.sampled_from(uni.atoms_of_top("A"))))
    pool = sorted(atoms) or ["A0"]
    pairs = (
        draw(st.frozensets(st.tuples(st.sampled_from(pool), st.sampled_from(pool))))
        if atoms
        else frozenset()
    )
    return Instance(uni, {"A": atoms}, {"r": pairs})


@settings(max_examples=80, deadline=None)
@given(selfref_instances(), selfref_instances(), selfref_instances())
def test_distance_metric_axioms(a, b, c):
    tm, _ = selfref_pair()
    d_ab = instance_distance(tm, a, b)
    assert d_ab >= 0
    assert (d_ab == 0) == (a == b)
    assert d_ab == instance_distance(tm, b, a)
    assert d_ab <= instance_distance(tm, a, c) + instance_distance(tm, c, b)


# -- closest ---------------------------------------------------------------


def test_closest_returns_satisfying_target_unchanged(lts_tm):
    # Valid targets are their own nearest valid instance.
    inst = corpus.lts_fault_instance(lts_tm, states=2, events=1)
    got = closest(lts_tm, inst, "invalid")  # nondeterministic: inv3 fails
    assert got == inst


def test_closest_valid_neighbor_of_fault(lts_tm):
    inst = corpus.lts_fault_instance(lts_tm, states=2, events=1)
    got = closest(lts_tm, inst, "valid")
    assert got is not None
    assert instance_distance(lts_tm, inst, got) == 1
    # One of the two branching steps must go. Keeping State1->Event0->State1
    # leaves the numerically smaller tuple bitstring, so it wins the tie.
    assert got.sig_sets == inst.sig_sets
    assert got.field_rel("trans") == frozenset({("State1", "Event0", "State1")})


def test_closest_exact_minimality_brute_force(selfref_tm):
    tm = selfref_tm
    scope = Scope(default_bound=2)
    uni = universe_for(tm, scope)
    valids = enumerate_instances(tm, None, scope).all()
    # Sweep every instance shape as a target.
    for target in oracle.all_structural_instances(tm, uni):
        got = closest(tm, target, "valid")
        want = min(instance_distance(tm, target, v) for v in valids)
        assert instance_distance(tm, target, got) == want


def test_closest_breaks_ties_canonically():
    tm = analyzed("sig A { r: set A }\nrun { one A } for 2")
    uni = universe_for(tm, Scope(default_bound=2))
    empty = Instance(uni, {"A": frozenset()}, {"r": frozenset()})
    got = closest(tm, empty, "valid")
    # {A0} and {A1} are both at distance 1; canonical order prefers A0.
    assert got.sig_set("A") == frozenset({"A0"})
    assert got.field_rel("r") == frozenset()


def test_closest_unsatisfiable_returns_none():
    tm = analyzed("sig A {}\nfact Never { some A\nno A }\nrun {} for 1")
    uni = universe_for(tm, Scope(default_bound=1))
    target = Instance(uni, {"A": frozenset({"A0"})}, {})
    assert closest(tm, target, "valid") is None


def test_closest_invalid_polarity_of_empty_goal_is_unsat(selfref_tm):
    # The bundled run has no constraint body: its negation holds nowhere.
    uni = universe_for(selfref_tm, Scope(default_bound=1))
    target = Instance(uni, {"A": frozenset()}, {"r": frozenset()})
    assert closest(selfref_tm, target, "invalid") is None


def test_closest_rejects_unknown_polarity(selfref_tm):
    uni = universe_for(selfref_tm, Scope(default_bound=1))
    target = Instance(uni, {"A": frozenset()}, {"r": frozenset()})
    with pytest.raises(ValueError):
        closest(selfref_tm, target, "sideways")


def test_closest_budget_guard(selfref_tm):
    uni = universe_for(selfref_tm, Scope(default_bound=2))
    target = Instance(uni, {"A": frozenset({"A0"})}, {"r": frozenset()})
    with pytest.raises(ScopeTooLarge):
        closest(selfref_tm, target, "invalid", goal=(), budget_bits=5)


def test_closest_satisfying_target_skips_budget(selfref_tm):
    # The early return for already-satisfying targets runs no search and
    # needs no budget.
    uni = universe_for(selfref_tm, Scope(default_bound=2))
    target = Instance(uni, {"A": frozenset()}, {"r": frozenset()})
    got = closest(selfref_tm, target, "valid", budget_bits=5)
    assert got == target


# -- default goal ----------------------------------------------------------


def test_default_goal_from_pred_run(queue_tm):
    goal = default_goal(queue_tm)
    assert goal == queue_tm.preds["lastLink"].formulas


def test_default_goal_from_inline_run():
    tm = analyzed("sig A {}\nrun { some A } for 1")
    goal = default_goal(tm)
    assert len(goal) == 1


def test_default_goal_empty_without_commands():
    tm = analyzed("sig A {}")
    assert default_goal(tm) == ()


# -- breakdown -------------------------------------------------------------


def lts_breakdown_pair(lts_tm):
    fault = corpus.lts_fault_instance(lts_tm, states=2, events=1)
    fixed = Instance(
        fault.universe,
        fault.sig_sets,
        {"trans": frozenset({("State1", "Event0", "State0")})},
    )
    return fault, fixed


def test_breakdown_empty_when_instances_agree(lts_tm):
    fault, _ = lts_breakdown_pair(lts_tm)
    goal = lts_tm.preds["inv3"].formulas
    assert breakdown(lts_tm, goal, fault, fault).rows == []


def test_breakdown_row_for_differing_goal(lts_tm):
    fault, fixed = lts_breakdown_pair(lts_tm)
    goal = lts_tm.preds["inv3"].formulas
    report = breakdown(lts_tm, goal, fault, fixed)
    assert [r.formula_id for r in report.rows] == ["goal"]
    row = report.rows[0]
    assert row.value_a is False and row.value_b is True
    # Exactly the branching binding disagrees.
    diffs = [(p.bindings, p.value_a, p.value_b) for p in row.per_binding]
    assert diffs == [({"s": "State1", "e": "Event0"}, False, True)]


def test_breakdown_skips_agreeing_bindings(lts_tm):
    fault, fixed = lts_breakdown_pair(lts_tm)
    goal = lts_tm.preds["inv3"].formulas
    row = breakdown(lts_tm, goal, fault, fixed).rows[0]
    keys = {tuple(sorted(p.bindings.items())) for p in row.per_binding}
    # State0/Event0 agrees on both sides and must not appear.
    assert (("e", "Event0"), ("s", "State0")) not in keys


def test_breakdown_numbers_multi_formula_goals():
    tm = analyzed(
        "sig A { r: set A }\nrun { no r\nsome A } for 1"
    )
    uni = universe_for(tm, Scope(default_bound=1))
    a = Instance(uni, {"A": frozenset({"A0"})}, {"r": frozenset({("A0", "A0")})})
    b = Instance(uni, {"A": frozenset()}, {"r": frozenset()})
    goal = tm.model.commands[0].inline
    ids = [r.formula_id for r in breakdown(tm, goal, a, b).rows]
    assert ids == ["goal[0]", "goal[1]"]


def test_breakdown_includes_fact_rows(queue_tm):
    uni = universe_for(queue_tm, Scope(default_bound=2))
    ok = corpus.queue_chain_instance(queue_tm, nodes=1, bound=2)
    # A node that links to itself breaks the acyclicity fact.
    cyc = Instance(
        uni,
        {"Queue": frozenset({"Queue0"}), "Node": frozenset({"Node0"})},
        {
            "head": frozenset({("Queue0", "Node0")}),
            "link": frozenset({("Node0", "Node0")}),
        },
    )
    report = breakdown(queue_tm, default_goal(queue_tm), cyc, ok)
    ids = [r.formula_id for r in report.rows]
    assert "WellFormed[0]" in ids


def test_breakdown_nested_quantifier_rows():
    # The inner closed quantifier gets its own row when it differs at
    # the top level.
    tm = analyzed(
        "sig A { r: set A }\nrun { some x: A | some x.r } for 2"
    )
    uni = universe_for(tm, Scope(default_bound=2))
    a = Instance(uni, {"A": frozenset({"A0"})}, {"r": frozenset({("A0", "A0")})})
    b = Instance(uni, {"A": frozenset({"A0"})}, {"r": frozenset()})
    goal = tm.model.commands[0].inline
    report = breakdown(tm, goal, a, b)
    ids = [r.formula_id for r in report.rows]
    assert ids == ["goal"]  # the quantifier IS the goal formula, no dup row


def test_breakdown_row_spans_and_text(lts_tm):
    fault, fixed = lts_breakdown_pair(lts_tm)
    goal = lts_tm.preds["inv3"].formulas
    row = breakdown(lts_tm, goal, fault, fixed).rows[0]
    start, end = row.span
    assert corpus.LTS_MODEL[start:end] == "all s: State, e: Event | lone e.(s.trans)"
    assert row.text.startswith("all s: State, e: Event")


def test_breakdown_missing_side_evaluated_directly():
    # The quantifier domain is an evaluated expression, so the sides can
    # disagree about which bindings even exist.
    tm = analyzed("sig A { r: set A }\nrun { all x: A.r | no x.r } for 2")
    uni = universe_for(tm, Scope(default_bound=2))
    a = Instance(
        uni,
        {"A": frozenset({"A0", "A1"})},
        {"r": frozenset({("A0", "A1"), ("A1", "A1")})},
    )
    b = Instance(uni, {"A": frozenset({"A0", "A1"})}, {"r": frozenset()})
    goal = tm.model.commands[0].inline
    report = breakdown(tm, goal, a, b)
    assert [r.formula_id for r in report.rows] == ["goal"]
    diffs = {p.bindings["x"]: (p.value_a, p.value_b) for p in report.rows[0].per_binding}
    # x=A1 exists only in a's domain, where the body fails; on side b the
    # body is evaluated directly under the same binding and holds.
    assert diffs == {"A1": (False, True)}


def test_breakdown_binding_order_follows_atom_rank(lts_tm):
    fault = corpus.lts_fault_instance(lts_tm, states=2, events=2)
    fixed = Instance(fault.universe, fault.sig_sets, {"trans": frozenset()})
    goal = lts_tm.preds["inv3"].formulas
    rows = breakdown(lts_tm, goal, fault, fixed).rows
    row = rows[0]
    ranks = [
        tuple(fault.universe.rank(v) for v in (p.bindings["s"], p.bindings["e"]))
        for p in row.per_binding
    ]
    assert ranks == sorted(ranks)


def test_breakdown_wire_shape(lts_tm):
    fault, fixed = lts_breakdown_pair(lts_tm)
    goal = lts_tm.preds["inv3"].formulas
    wire = breakdown(lts_tm, goal, fault, fixed).to_wire()
    assert list(wire) == ["rows"]
    row = wire["rows"][0]
    assert row["id"] == "goal"
    assert row["valueOnA"] is False and row["valueOnB"] is True
    assert row["perBinding"] == [
        {"bindings": {"s": "State1", "e": "Event0"}, "valueOnA": False, "valueOnB": True}
    ]


def test_breakdown_requires_shared_universe(lts_tm):
    fault, _ = lts_breakdown_pair(lts_tm)
    other = Universe.from_scope(lts_tm, per_sig={"State": 3, "Event": 1})
    alien = Instance(other, {}, {})
    with pytest.raises(StructuralMismatch):
        breakdown(lts_tm, (), fault, alien)


def test_breakdown_rows_iff_top_value_differs(queue_tm):
    # Property over a handful of enumerated pairs: a row appears exactly
    # when the two sides disagree on that formula.
    insts = enumerate_instances(queue_tm, None, Scope(default_bound=2)).take(4)
    goal = default_goal(queue_tm)
    labeled = []
    for fact in queue_tm.model.facts:
        for i, f in enumerate(fact.formulas):
            labeled.append((f"{fact.name}[{i}]", f))
    labeled.append(("goal", goal[0]))
    for a in insts:
        for b in insts:
            rows = {r.formula_id for r in breakdown(queue_tm, goal, a, b).rows}
            for label, f in labeled:
                differs = oracle.naive_formula(a, {}, f) != oracle.naive_formula(
                    b, {}, f
                )
                assert (label in rows) == differs, (label, a, b)
