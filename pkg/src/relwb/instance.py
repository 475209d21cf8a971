"""Finite universes and instances.

A universe fixes the atom pool per top-level sig (``State0``, ``State1``,
...). An instance assigns each sig a subset of its hierarchy's atoms and
each field a set of atom tuples. Instances are value objects: equality and
hashing go through a canonical key, and all relation values are frozensets
of atom tuples.
"""
from __future__ import annotations

import re
from typing import Iterable, Optional

from . import ast
from .errors import StructuralMismatch
from .typecheck import TypedModel

Tuple = tuple[str, ...]


class Universe:
    def __init__(self, atoms_per_top: dict[str, tuple[str, ...]]):
        self.atoms_per_top = dict(atoms_per_top)
        self._rank: dict[str, int] = {}
        self._top: dict[str, str] = {}
        for top, atoms in self.atoms_per_top.items():
            for atom in atoms:
                self._rank[atom] = len(self._rank)
                self._top[atom] = top

    @classmethod
    def from_scope(
        cls, tm: TypedModel, default_bound: int = 3, per_sig: Optional[dict[str, int]] = None
    ) -> "Universe":
        per_sig = per_sig or {}
        atoms: dict[str, tuple[str, ...]] = {}
        for sig in tm.model.sigs:
            if sig.kind != ast.TOP:
                continue
            if sig.mult == ast.MULT_ONE:
                bound = 1
            else:
                bound = per_sig.get(sig.name, default_bound)
            atoms[sig.name] = tuple(f"{sig.name}{i}" for i in range(bound))
        return cls(atoms)

    def atoms_of_top(self, top: str) -> tuple[str, ...]:
        return self.atoms_per_top[top]

    def rank(self, atom: str) -> int:
        return self._rank[atom]

    def top_of_atom(self, atom: str) -> str:
        return self._top[atom]

    def __contains__(self, atom: str) -> bool:
        return atom in self._rank

    def sort_atoms(self, atoms: Iterable[str]) -> list[str]:
        return sorted(atoms, key=self._rank.__getitem__)

    def sort_tuples(self, tuples: Iterable[Tuple]) -> list[Tuple]:
        return sorted(tuples, key=lambda t: tuple(self._rank[a] for a in t))

    def key(self) -> tuple:
        return tuple(self.atoms_per_top.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, Universe) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}:{len(v)}" for k, v in self.atoms_per_top.items())
        return f"Universe({inner})"


class Instance:
    def __init__(
        self,
        universe: Universe,
        sig_sets: dict[str, frozenset[str]],
        field_rels: dict[str, frozenset[Tuple]],
    ):
        self.universe = universe
        self.sig_sets = {k: frozenset(v) for k, v in sig_sets.items()}
        self.field_rels = {k: frozenset(v) for k, v in field_rels.items()}
        self._key = (
            universe.key(),
            tuple(sorted((k, tuple(universe.sort_atoms(v))) for k, v in self.sig_sets.items())),
            tuple(
                sorted((k, tuple(universe.sort_tuples(v))) for k, v in self.field_rels.items())
            ),
        )

    def key(self) -> tuple:
        return self._key

    def sig_set(self, name: str) -> frozenset[str]:
        return self.sig_sets.get(name, frozenset())

    def field_rel(self, name: str) -> frozenset[Tuple]:
        return self.field_rels.get(name, frozenset())

    def __eq__(self, other) -> bool:
        return isinstance(other, Instance) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Instance{self._key[1:]}"


def structural_violations(tm: TypedModel, inst: Instance) -> list[str]:
    """Well-formedness of the instance shape itself.

    Multiplicity constraints (field mults, sig size keywords) are not
    checked here; those are part of instance checking, not structure.
    """
    out: list[str] = []
    for name in inst.sig_sets:
        if name not in tm.sigs:
            raise StructuralMismatch(f"unknown sig '{name}' in instance")
    for name in inst.field_rels:
        if name not in tm.fields:
            raise StructuralMismatch(f"unknown field '{name}' in instance")

    for sig in tm.model.sigs:
        atoms = inst.sig_set(sig.name)
        if sig.kind == ast.TOP:
            pool = set(inst.universe.atoms_of_top(sig.name))
            if not atoms <= pool:
                out.append(f"sig '{sig.name}' uses atoms outside its universe pool")
        else:
            parent = inst.sig_set(sig.parent)
            if not atoms <= parent:
                out.append(f"sig '{sig.name}' is not a subset of '{sig.parent}'")
        ext = tm.children(sig.name, ast.EXTENDS)
        for i, a in enumerate(ext):
            for b in ext[i + 1 :]:
                if inst.sig_set(a) & inst.sig_set(b):
                    out.append(f"'{a}' and '{b}' overlap but extend the same sig")
        if sig.abstract:
            union = frozenset().union(*(inst.sig_set(c) for c in ext)) if ext else frozenset()
            if atoms != union:
                out.append(
                    f"abstract sig '{sig.name}' has atoms outside its extending sigs"
                )

    for fld in tm.fields.values():
        col_sets = [inst.sig_set(fld.owner)] + [inst.sig_set(c) for c in fld.cols]
        for t in inst.field_rel(fld.name):
            if len(t) != fld.arity:
                out.append(f"field '{fld.name}' holds a tuple of wrong arity")
                continue
            for atom, col in zip(t, col_sets):
                if atom not in col:
                    out.append(
                        f"field '{fld.name}' tuple {'->'.join(t)} is not well-typed"
                    )
                    break
    return out


def multiplicities_ok(tm: TypedModel, inst: Instance) -> bool:
    """Field multiplicities and sig size keywords, the soft layer."""
    for sig in tm.model.sigs:
        n = len(inst.sig_set(sig.name))
        if sig.mult == ast.MULT_ONE and n != 1:
            return False
        if sig.mult == ast.MULT_LONE and n > 1:
            return False
        if sig.mult == ast.MULT_SOME and n < 1:
            return False
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


# --------------------------------------------------------------------------
# Serialization


def to_text(tm: TypedModel, inst: Instance) -> str:
    """Assignment-style rendering, one relation per line."""
    lines = []
    for sig in tm.model.sigs:
        lines.append(_entry(sig.name, [(a,) for a in inst.sig_set(sig.name)], inst))
    for sig in tm.model.sigs:
        for fld in sig.fields:
            lines.append(_entry(fld.name, inst.field_rel(fld.name), inst))
    return "\n".join(lines) + "\n"


def _entry(name: str, tuples: Iterable[Tuple], inst: Instance) -> str:
    ordered = inst.universe.sort_tuples(tuples)
    if not ordered:
        return f"no {name}"
    return f"{name} = " + " + ".join("->".join(t) for t in ordered)


_LINE = re.compile(r"^\s*(?:no\s+(\w+)|(\w+)\s*=\s*(.*?))\s*$")


def from_text(tm: TypedModel, universe: Universe, text: str) -> Instance:
    """Parse the assignment-style format back into an instance.

    Unmentioned sigs and fields are empty. Raises StructuralMismatch on
    unknown names or atoms.
    """
    sig_sets: dict[str, frozenset[str]] = {}
    field_rels: dict[str, frozenset[Tuple]] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("//"):
            continue
        m = _LINE.match(line)
        if not m:
            raise StructuralMismatch(f"cannot read instance line: {raw!r}")
        if m.group(1):
            name, tuples = m.group(1), frozenset()
        else:
            name = m.group(2)
            parts = [p.strip() for p in m.group(3).split("+")]
            tuples = frozenset(tuple(a.strip() for a in p.split("->")) for p in parts)
        for t in tuples:
            for atom in t:
                if atom not in universe:
                    raise StructuralMismatch(f"unknown atom '{atom}'")
        if name in tm.sigs:
            if any(len(t) != 1 for t in tuples):
                raise StructuralMismatch(f"sig '{name}' assigned non-atom tuples")
            sig_sets[name] = frozenset(t[0] for t in tuples)
        elif name in tm.fields:
            field_rels[name] = tuples
        else:
            raise StructuralMismatch(f"unknown relation '{name}'")
    return Instance(universe, sig_sets, field_rels)


def to_json(tm: TypedModel, inst: Instance) -> dict:
    return {
        "sigs": {
            sig.name: inst.universe.sort_atoms(inst.sig_set(sig.name))
            for sig in tm.model.sigs
        },
        "fields": {
            fld.name: [list(t) for t in inst.universe.sort_tuples(inst.field_rel(fld.name))]
            for fld in tm.fields.values()
        },
    }


def from_json(tm: TypedModel, universe: Universe, data: dict) -> Instance:
    sig_sets = {}
    for name, atoms in data.get("sigs", {}).items():
        if name not in tm.sigs:
            raise StructuralMismatch(f"unknown sig '{name}' in instance")
        for a in atoms:
            if a not in universe:
                raise StructuralMismatch(f"unknown atom '{a}'")
        sig_sets[name] = frozenset(atoms)
    field_rels = {}
    for name, tuples in data.get("fields", {}).items():
        if name not in tm.fields:
            raise StructuralMismatch(f"unknown field '{name}' in instance")
        rel = frozenset(tuple(t) for t in tuples)
        for t in rel:
            for a in t:
                if a not in universe:
                    raise StructuralMismatch(f"unknown atom '{a}'")
        field_rels[name] = rel
    return Instance(universe, sig_sets, field_rels)


def universe_to_json(universe: Universe) -> dict:
    return {top: list(atoms) for top, atoms in universe.atoms_per_top.items()}


def universe_from_json(data: dict) -> Universe:
    return Universe({top: tuple(atoms) for top, atoms in data.items()})
