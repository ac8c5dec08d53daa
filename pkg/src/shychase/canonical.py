"""Shape-indexed rewriting of a theory and its inverse.

Every atom p(t1,...,tm) has a canonical form p_[l1,...,lm](v1,...,vk) whose
bracketed shape records constants and the equality pattern of the remaining
terms, and whose arguments list each distinct non-constant term once.  A
theory is rewritten by instantiating every rule under all ways of grouping
its universal variables into equality classes or freezing them to known
constants, then canonicalising the result.  The unpacking function inverts
the encoding atom by atom.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable

from .core import (
    Atom,
    Constant,
    Database,
    Instance,
    Ontology,
    Query,
    Rule,
    Variable,
    constants_of,
)
from .hom import isomorphic


class UnpackError(ValueError):
    pass


def canonical_atom(atom: Atom) -> Atom:
    """Canonical form of a shape-free atom.

    Constants move into the shape verbatim; other terms are numbered by
    first occurrence and kept, once each, as the arguments.
    """
    if atom.shape is not None:
        raise ValueError(f"atom {atom!r} already carries a shape")
    labels = []
    seen: dict = {}
    for t in atom.args:
        if isinstance(t, Constant):
            labels.append(t.name)
        elif t in seen:
            labels.append(seen[t])
        else:
            seen[t] = len(seen) + 1
            labels.append(seen[t])
    args = sorted(seen, key=seen.get)
    return Atom(atom.pred, tuple(args), tuple(labels))


@dataclass(frozen=True)
class SubstitutionPattern:
    """Grouping of a rule's universal variables into equality classes or
    known constants; existential variables are left alone."""

    assignment: tuple  # pairs (Variable, Constant | int class id), class ids by first use

    def as_substitution(self) -> dict:
        """Variable-to-term map; each class is represented by its first member."""
        reps: dict = {}
        out: dict = {}
        for var, target in self.assignment:
            if isinstance(target, Constant):
                out[var] = target
            else:
                out[var] = reps.setdefault(target, var)
        return out

    def apply(self, atom: Atom) -> Atom:
        subst = self.as_substitution()
        return Atom(atom.pred, tuple(subst.get(t, t) for t in atom.args))


def _dedup(atoms: Iterable[Atom]) -> tuple:
    out = []
    for a in atoms:
        if a not in out:
            out.append(a)
    return tuple(out)


def _first_occurrence_vars(atoms: Iterable[Atom]) -> list:
    order = []
    for a in atoms:
        for v in a.variables():
            if v not in order:
                order.append(v)
    return order


def _assignments(variables: list, constants: list):
    """All maps var -> equality class or constant, classes in restricted
    growth order (a new class id is one past the largest id used so far)."""

    def rec(i, classes, current):
        if i == len(variables):
            yield SubstitutionPattern(tuple(current))
            return
        v = variables[i]
        for k in range(1, classes + 1):
            current.append((v, k))
            yield from rec(i + 1, classes, current)
            current.pop()
        current.append((v, classes + 1))
        yield from rec(i + 1, classes + 1, current)
        current.pop()
        for c in constants:
            current.append((v, c))
            yield from rec(i + 1, classes, current)
            current.pop()

    yield from rec(0, 0, [])


def _tagged_atoms(rule: Rule) -> frozenset:
    # the space in the predicate name cannot clash with parsed predicates
    head = Atom(rule.head.pred + " head", rule.head.args, rule.head.shape)
    return frozenset(rule.body) | {head}


def rewrite_rule(rule: Rule, pattern: SubstitutionPattern) -> Rule:
    """Canonical instantiation of one rule under one pattern."""
    body = _dedup(canonical_atom(pattern.apply(a)) for a in rule.body)
    head = canonical_atom(pattern.apply(rule.head))
    return Rule(rule.id, body, head)


def enumerate_safe_patterns(rule: Rule, consts: Iterable[Constant]) -> tuple:
    """One pattern per isomorphism class of canonical instantiations of the rule.

    Enumerating equality classes in restricted growth order avoids most
    duplicates; a final isomorphism pass removes the rest (symmetric bodies).
    """
    order = _first_occurrence_vars(rule.body)
    constants = sorted(set(consts))
    kept = []
    signatures = []
    for pattern in _assignments(order, constants):
        sig = _tagged_atoms(rewrite_rule(rule, pattern))
        if any(isomorphic(sig, other) for other in signatures):
            continue
        signatures.append(sig)
        kept.append(pattern)
    return tuple(kept)


def rewrite_database(db: Database) -> Database:
    return Database(frozenset(canonical_atom(a) for a in db))


def rewrite_ontology(db: Database, onto: Ontology) -> Ontology:
    """All canonical rules, numbered per source rule for provenance.

    Instantiations whose head coincides with a body atom are tautologies
    (merging variables can degrade a rule to one); they never add an atom
    under any chase and are dropped.
    """
    consts = sorted(constants_of(db, onto))
    out = []
    for rule in onto:
        for i, pattern in enumerate(enumerate_safe_patterns(rule, consts), 1):
            rewritten = replace(rewrite_rule(rule, pattern), id=f"{rule.id}.{i}")
            if rewritten.head in rewritten.body:
                continue
            out.append(rewritten)
    return Ontology(tuple(out))


def rewrite_query(q: Query, consts: Iterable[Constant]) -> Query:
    """Expand each disjunct over all equality patterns of its variables."""
    constants = sorted(set(consts))
    disjuncts = []
    signatures = []
    for disjunct in q.disjuncts:
        order = _first_occurrence_vars(disjunct)
        for pattern in _assignments(order, constants):
            atoms = _dedup(canonical_atom(pattern.apply(a)) for a in disjunct)
            sig = frozenset(atoms)
            if any(isomorphic(sig, other) for other in signatures):
                continue
            signatures.append(sig)
            disjuncts.append(atoms)
    return Query(tuple(disjuncts))


def rewrite_theory(db: Database, onto: Ontology, queries: Iterable[Query] = ()):
    """(database, ontology, queries) in canonical form, sharing one constant pool."""
    consts = sorted(constants_of(db, onto))
    return (
        rewrite_database(db),
        rewrite_ontology(db, onto),
        tuple(rewrite_query(q, consts) for q in queries),
    )


# ---------------------------------------------------------------------------
# unpacking


def unpack_atom(atom: Atom) -> Atom:
    if atom.shape is None:
        raise UnpackError(f"atom {atom!r} carries no shape")
    args = []
    for label in atom.shape:
        if isinstance(label, str):
            args.append(Constant(label))
        elif 1 <= label <= len(atom.args):
            args.append(atom.args[label - 1])
        else:
            raise UnpackError(f"shape label {label} out of range in {atom!r}")
    return Atom(atom.pred, tuple(args))


def unpack(value):
    """Apply the inverse encoding to an atom or any container of atoms."""
    if isinstance(value, Atom):
        return unpack_atom(value)
    if isinstance(value, Instance):
        return Instance(frozenset(unpack_atom(a) for a in value))
    if isinstance(value, Database):
        return Database(frozenset(unpack_atom(a) for a in value))
    if isinstance(value, Rule):
        return Rule(value.id, tuple(unpack_atom(a) for a in value.body),
                    unpack_atom(value.head))
    if isinstance(value, Ontology):
        return Ontology(tuple(unpack(r) for r in value))
    if isinstance(value, Query):
        return Query(tuple(tuple(unpack_atom(a) for a in d) for d in value.disjuncts))
    if isinstance(value, (set, frozenset)):
        return type(value)(unpack_atom(a) for a in value)
    if isinstance(value, (list, tuple)):
        return type(value)(unpack(a) for a in value)
    raise UnpackError(f"cannot unpack {type(value).__name__}")


def partition_active_harmless(onto: Ontology):
    """Split rules by body joins: harmless rules repeat a variable across
    body atoms, active rules do not."""
    active, harmless = [], []
    for rule in onto:
        counts: dict = {}
        for atom in rule.body:
            for v in set(atom.variables()):
                counts[v] = counts.get(v, 0) + 1
        if any(n > 1 for n in counts.values()):
            harmless.append(rule)
        else:
            active.append(rule)
    return Ontology(tuple(active)), Ontology(tuple(harmless))
