"""Bundled example models and hand-built instances.

These fixtures anchor the test suite and the CLI demos: a static queue, a
labeled transition system with a deterministic-transitions predicate in a
correct and a faulty variant, a CV-sharing model with a visibility
predicate in two variants, and a minimal self-referential model.
"""
from __future__ import annotations

from .instance import Instance, Universe
from .typecheck import TypedModel, analyze

QUEUE_MODEL = """\
one sig Queue { head: lone Node }
sig Node { link: lone Node }

fact WellFormed {
  all n: Node | n !in n.^link
  all n: Node | n in Queue.head.*link
}

pred lastLink { all n: Queue.head.^link | no n.link }
pred lastLinkFaulty { all n: Queue.head.*link | no n.link }

run lastLink for 3
"""

LTS_MODEL = """\
sig State { trans: Event -> State }
sig Init in State {}
sig Event {}

pred inv3 { all s: State, e: Event | lone e.(s.trans) }
pred inv3Faulty { all s: State, e: Event | lone s.(e.trans) }

run inv3 for 3
"""

CV_MODEL = """\
abstract sig Source {}
sig User extends Source { profile: set Work, visible: set Work }
sig Institution extends Source {}
sig Id {}
sig Work { ids: some Id, source: one Source }

pred inv1 { all u: User | u.visible in u.profile }
pred inv1Faulty { all u: User | u.visible in User.profile }

run inv1 for 2
"""

SELFREF_MODEL = """\
sig A { r: set A }

run {} for 2
"""

MODELS = {
    "queue": QUEUE_MODEL,
    "lts": LTS_MODEL,
    "cv": CV_MODEL,
    "selfref": SELFREF_MODEL,
}


def typed_model(name: str) -> TypedModel:
    tm, diags = analyze(MODELS[name])
    if tm is None:
        raise AssertionError(f"bundled model '{name}' failed analysis: {diags}")
    return tm


def lts_fault_instance(tm: TypedModel, states: int = 2, events: int = 3) -> Instance:
    """A nondeterministic LTS: one event out of State1 reaches two states.

    The faulty determinism predicate accepts it, the correct one rejects
    it. Extra event atoms are idle; shrink the universe via the arguments.
    """
    universe = Universe.from_scope(tm, per_sig={"State": states, "Event": events})
    return Instance(
        universe,
        {
            "State": frozenset({"State0", "State1"}),
            "Init": frozenset({"State1"}),
            "Event": frozenset(universe.atoms_of_top("Event")),
        },
        {
            "trans": frozenset(
                {
                    ("State1", "Event0", "State0"),
                    ("State1", "Event0", "State1"),
                }
            )
        },
    )


def queue_chain_instance(tm: TypedModel, nodes: int = 2, bound: int = 3) -> Instance:
    """A queue whose head starts a chain of `nodes` linked nodes."""
    universe = Universe.from_scope(tm, per_sig={"Node": bound})
    atoms = universe.atoms_of_top("Node")[:nodes]
    links = frozenset(zip(atoms, atoms[1:]))
    head = frozenset({("Queue0", atoms[0])}) if atoms else frozenset()
    return Instance(
        universe,
        {"Queue": frozenset({"Queue0"}), "Node": frozenset(atoms)},
        {"head": head, "link": links},
    )


def cv_fault_instance(tm: TypedModel) -> Instance:
    """Two users where one's visible works live only in the other's profile.

    Mirrors the shared-CV scenario: every work User0 exposes sits in
    User1's profile, so the per-user visibility rule fails while the
    collapsed variant quantifying over all profiles holds.
    """
    universe = Universe.from_scope(
        tm, per_sig={"Source": 2, "Id": 1, "Work": 3}
    )
    users = ("Source0", "Source1")
    works = ("Work0", "Work1", "Work2")
    return Instance(
        universe,
        {
            "Source": frozenset(users),
            "User": frozenset(users),
            "Institution": frozenset(),
            "Id": frozenset({"Id0"}),
            "Work": frozenset(works),
        },
        {
            "profile": frozenset(("Source1", w) for w in works),
            "visible": frozenset(("Source0", w) for w in works),
            "ids": frozenset((w, "Id0") for w in works),
            "source": frozenset(
                {("Work0", "Source1"), ("Work1", "Source1"), ("Work2", "Source0")}
            ),
        },
    )
