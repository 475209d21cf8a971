"""End-to-end acceptance battery.

One test per top-level product guarantee, each with an explicit runtime
budget where a guarantee carries one. Reference values are checked
against the independent brute-force oracle in oracle.py, never against
the implementation itself.
"""
import json
import random
import subprocess
import sys
import time

import oracle
from conftest import analyzed

from relwb import ast, corpus
from relwb.complete import suggest
from relwb.evaluate import eval_expr, eval_formula
from relwb.finder import (
    Scope,
    categorize,
    enumerate_instances,
    goal_formulas,
    universe_for,
)
from relwb.parser import parse_expression, resolve_expr_in_context
from relwb.proximity import breakdown, closest, default_goal, instance_distance
from relwb.typecheck import analyze

SELFREF = corpus.SELFREF_MODEL


def probe_rtype(model_text, expr_source):
    """Type of an expression as it appears inside the given model."""
    tm, diags = analyze(f"{model_text}\npred probe {{ some {expr_source} }}")
    assert tm is not None and not any(d.is_error for d in diags)
    formula = tm.preds["probe"].formulas[0]
    return tm, formula.expr.rtype, diags


def eval_in(tm, inst, text, atom_vars=()):
    """Evaluate an expression that may name individual atoms."""
    expr, diags = parse_expression(text)
    assert expr is not None and not diags
    expr, diags = resolve_expr_in_context(
        expr, set(tm.sigs), set(tm.fields), set(atom_vars)
    )
    assert not any(d.is_error for d in diags)
    env = {a: a for a in atom_vars}
    return eval_expr(inst, env, expr)


def resolved(tm, text):
    expr, _ = parse_expression(text)
    expr, diags = resolve_expr_in_context(
        expr, set(tm.sigs), set(tm.fields), set()
    )
    assert not any(d.is_error for d in diags)
    return expr


def pred_holds(tm, inst, name):
    return all(eval_formula(inst, {}, f) for f in tm.preds[name].formulas)


# Fixture models with the exhaustively checkable scopes used throughout.
def fixture_combos():
    return [
        ("selfref", corpus.typed_model("selfref"), Scope(default_bound=2)),
        ("queue", corpus.typed_model("queue"), Scope(default_bound=2)),
        ("lts", corpus.typed_model("lts"), Scope(default_bound=2)),
        (
            "cv",
            corpus.typed_model("cv"),
            Scope(default_bound=2, per_sig={"Id": 1, "Work": 1}),
        ),
    ]


def test_provably_empty_joins_are_typed_empty_and_never_suggested():
    t0 = time.monotonic()
    queue_tm, bad, diags = probe_rtype(corpus.QUEUE_MODEL, "link.head")
    assert bad.vacuous
    assert any(d.code == "VACUOUS_JOIN" for d in diags)
    _, good, _ = probe_rtype(corpus.QUEUE_MODEL, "head.link")
    assert good.products == frozenset({("Queue", "Node")})

    lts_tm, _ = analyze(
        corpus.LTS_MODEL + "pred probe { all e: Event | some e.trans }\n"
    )
    body = next(
        n
        for n in ast.walk(lts_tm.preds["probe"].formulas[0])
        if isinstance(n, ast.MultFormula)
    )
    assert body.expr.rtype.vacuous

    # Suggestion lists must omit exactly those join partners.
    after_link = suggest(queue_tm, resolved(queue_tm, "link"), cursor="after-dot")
    texts = [s.insert_text for s in after_link.suggestions]
    assert "head" not in texts and "link" in texts
    after_event = suggest(lts_tm, resolved(lts_tm, "Event"), cursor="after-dot")
    assert after_event.suggestions == []
    assert time.monotonic() - t0 < 1.0


def test_walkthrough_evaluation_values_reproduce_exactly():
    t0 = time.monotonic()
    lts_tm = corpus.typed_model("lts")
    fault = corpus.lts_fault_instance(lts_tm, states=2, events=1)
    atoms = ("State1", "Event0")
    assert eval_in(lts_tm, fault, "State1.trans", atoms) == frozenset(
        {("Event0", "State0"), ("Event0", "State1")}
    )
    assert eval_in(lts_tm, fault, "Event0.trans", atoms) == frozenset()
    assert eval_in(lts_tm, fault, "Event0.(State1.trans)", atoms) == frozenset(
        {("State0",), ("State1",)}
    )
    assert not pred_holds(lts_tm, fault, "inv3")
    assert pred_holds(lts_tm, fault, "inv3Faulty")

    cv_tm = corpus.typed_model("cv")
    cv_fault = corpus.cv_fault_instance(cv_tm)
    assert not pred_holds(cv_tm, cv_fault, "inv1")
    assert pred_holds(cv_tm, cv_fault, "inv1Faulty")
    assert time.monotonic() - t0 < 1.0


def test_instance_streams_match_brute_force_enumeration():
    t0 = time.monotonic()
    selfref_tm = corpus.typed_model("selfref")
    tiny = enumerate_instances(selfref_tm, (), scope=Scope(default_bound=1)).all()
    assert len(tiny) == 3

    for name, tm, scope in fixture_combos():
        goal = default_goal(tm)
        universe = universe_for(tm, scope)
        got = enumerate_instances(tm, goal, scope=scope).all()
        want = set(oracle.satisfying_set(tm, universe, goal_formulas(goal)))
        assert len(got) == len(set(got)), name
        assert set(got) == want, name
    assert time.monotonic() - t0 < 60.0


def test_goal_edit_partitions_the_bounded_space_exactly():
    t0 = time.monotonic()
    tm = corpus.typed_model("lts")
    scope = Scope(default_bound=2, per_sig={"Event": 1})
    universe = universe_for(tm, scope)
    old_goal = tuple(tm.preds["inv3Faulty"].formulas)
    new_goal = tuple(tm.preds["inv3"].formulas)
    streams = categorize(tm, old_goal, new_goal, scope=scope)
    buckets = {k: streams.cursor(k).all() for k in streams.KEYS}

    sets = [set(v) for v in buckets.values()]
    assert sum(len(v) for v in buckets.values()) == len(set().union(*sets))
    for i, a in enumerate(sets):
        for b in sets[i + 1 :]:
            assert not (a & b)
    fact_space = set(oracle.satisfying_set(tm, universe, ()))
    assert set().union(*sets) == fact_space

    fault = corpus.lts_fault_instance(tm, states=2, events=1)
    assert fault in set(buckets["becameInvalid"])
    assert time.monotonic() - t0 < 60.0


def test_nearest_instance_search_is_exactly_minimal():
    t0 = time.monotonic()
    rng = random.Random(20260823)
    trials = 0
    for name, tm, scope in fixture_combos():
        universe = universe_for(tm, scope)
        goal = default_goal(tm)
        structural = oracle.all_structural_instances(tm, universe)
        valid = set(oracle.satisfying_set(tm, universe, goal_formulas(goal)))
        fact_sat = oracle.satisfying_set(tm, universe, ())
        invalid = {
            i
            for i in fact_sat
            if not all(oracle.naive_formula(i, {}, f) for f in goal_formulas(goal))
        }
        pools = {"valid": valid, "invalid": invalid}
        for _ in range(13):
            target = rng.choice(structural)
            polarity = rng.choice(["valid", "invalid"])
            result = closest(tm, target, polarity, goal=goal)
            pool = pools[polarity]
            trials += 1
            if result is None:
                assert not pool, name
                continue
            assert result in pool, (name, polarity)
            best = min(instance_distance(tm, target, i) for i in pool)
            assert instance_distance(tm, target, result) == best, (name, polarity)
    assert trials >= 50
    assert time.monotonic() - t0 < 300.0


def closed_quants(f):
    return [
        n
        for n in ast.walk(f)
        if isinstance(n, ast.QuantFormula) and not ast.free_vars(n)
    ]


def test_difference_reports_list_exactly_the_differing_formulas():
    t0 = time.monotonic()
    rng = random.Random(7)
    for name, tm, scope in fixture_combos():
        universe = universe_for(tm, scope)
        goal = default_goal(tm)
        structural = oracle.all_structural_instances(tm, universe)
        tops = [f for fact in tm.model.facts for f in fact.formulas]
        tops += list(goal_formulas(goal))
        for _ in range(20):
            a, b = rng.choice(structural), rng.choice(structural)
            expected = set()
            for f in tops:
                candidates = {id(f): f}
                for q in closed_quants(f):
                    candidates[id(q)] = q
                for c in candidates.values():
                    if oracle.naive_formula(a, {}, c) != oracle.naive_formula(
                        b, {}, c
                    ):
                        expected.add(c.span)
            rows = breakdown(tm, goal, a, b).rows
            spans = [r.span for r in rows]
            assert len(spans) == len(set(spans)), name
            assert sorted(spans) == sorted(expected), name
    assert time.monotonic() - t0 < 60.0


def test_edit_cancels_in_flight_solve_and_never_surfaces_stale_results():
    steps = [
        {
            "op": "open",
            "model": "selfref",
            "scope": {"default": 2},
            "debounceMs": 10,
            "solveDelayMs": 5000,
        },
        {"op": "sleep", "ms": 300},
        {"op": "edit", "text": SELFREF + "\npred extra { some A }"},
        {"op": "sleep", "ms": 300},
        {"op": "wait", "timeoutMs": 20000},
        {"op": "view", "category": "stayedValid"},
    ]
    proc = subprocess.run(
        [sys.executable, "-m", "relwb", "script", "-"],
        input=json.dumps(steps),
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0, proc.stderr
    data = json.loads(proc.stdout)
    events = data["events"]

    edit_t = next(
        e["t"]
        for e in events
        if e["type"] == "editAccepted" and e["generation"] == 1
    )
    cancel = next(
        e
        for e in events
        if e["type"] == "solveCancelled" and e["generation"] == 0
    )
    assert cancel["t"] - edit_t < 0.1  # superseded solve dies promptly

    committed = [
        e
        for e in events
        if e["type"] == "resultCommitted" and e.get("task") == "categories"
    ]
    assert [e["generation"] for e in committed] == [1]
    newest = -1
    for e in events:
        if e["type"] == "editAccepted":
            newest = max(newest, e["generation"])
        if e["type"] == "resultCommitted":
            assert e["generation"] >= newest
    view = data["outputs"][-1]["view"]
    assert view["stale"] is False and view["generation"] == 1


def test_behavioral_properties_hold_across_randomized_goals():
    bodies = [
        "no A",
        "some A",
        "some r",
        "no r",
        "all x: A | some x.r",
        "some x: A | no x.r",
    ]
    preds = "\n".join(
        f"pred g{i} {{ {body} }}" for i, body in enumerate(bodies)
    )
    tm = analyzed(f"sig A {{ r: set A }}\n{preds}\nrun g0 for 2")
    universe = universe_for(tm, Scope(default_bound=2))
    space = oracle.all_structural_instances(tm, universe)
    goals = [tuple(tm.preds[f"g{i}"].formulas) for i in range(len(bodies))]

    rng = random.Random(11)
    for old in goals:
        for new in goals:
            streams = categorize(tm, old, new, universe=universe)
            buckets = {k: streams.cursor(k).all() for k in streams.KEYS}
            union = [i for v in buckets.values() for i in v]
            assert len(union) == len(set(union))
            assert set(union) == set(space)  # no facts: all structural
            for inst in (rng.choice(space) for _ in range(5)):
                was = all(oracle.naive_formula(inst, {}, f) for f in old)
                now = all(oracle.naive_formula(inst, {}, f) for f in new)
                key = {
                    (True, True): "stayedValid",
                    (False, True): "becameValid",
                    (False, False): "stayedInvalid",
                    (True, False): "becameInvalid",
                }[(was, now)]
                assert inst in set(buckets[key])

    for goal in goals:
        pool = {
            i
            for i in space
            if all(oracle.naive_formula(i, {}, f) for f in goal)
        }
        for _ in range(3):
            target = rng.choice(space)
            result = closest(tm, target, "valid", goal=goal)
            if result is None:
                assert not pool
                continue
            best = min(instance_distance(tm, target, i) for i in pool)
            assert instance_distance(tm, target, result) == best
