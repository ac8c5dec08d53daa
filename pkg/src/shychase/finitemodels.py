"""Finite-model machinery: model checking, well-supported orderings, bounded
minimal-model enumeration, smooth instances, propagation orderings, and the
join-breaking repair that turns a model of the active part of a canonical
theory into one of the full theory.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable, Iterator, Optional

from .core import (
    Atom,
    Constant,
    Database,
    Instance,
    Null,
    Ontology,
    Query,
    Rule,
    constants_of,
    term_key,
)
from .canonical import partition_active_harmless
from .classify import classify_local
from .hom import apply_mapping, find_homomorphism, homomorphisms, isomorphic, satisfies_query, _match


@dataclass(frozen=True)
class ModelBudget:
    max_extra_nulls: int
    max_atoms: int

    def __post_init__(self):
        if self.max_extra_nulls < 0:
            raise ValueError("max_extra_nulls must be non-negative")
        if self.max_atoms < 1:
            raise ValueError("max_atoms must be positive")


def is_model(inst: Instance, db: Database, onto: Ontology):
    """(True, None) if inst contains db and satisfies every rule, else
    (False, violation); violation is (None, missing db atom) or (rule, body map)."""
    for a in sorted(db, key=Atom.sort_key):
        if a not in inst:
            return False, (None, a)
    for rule in sorted(onto, key=lambda r: r.id):
        for h in homomorphisms(rule.body, inst):
            seed = {v: h[v] for v in rule.uv if v in h}
            if find_homomorphism([rule.head], inst, seed) is None:
                return False, (rule, h)
    return True, None


@dataclass(frozen=True)
class SupportStep:
    atom: Atom
    rule_id: Optional[str]  # None marks a database atom
    mapping: Optional[dict] = None

    @property
    def from_database(self) -> bool:
        return self.rule_id is None


def _head_supports(rule: Rule, atom: Atom, prefix) -> Iterator[dict]:
    """Homomorphisms of the rule's atoms with the head sent exactly to atom
    and the body inside prefix."""
    if (rule.head.pred_key, rule.head.arity) != (atom.pred_key, atom.arity):
        return
    seed = _match(rule.head, atom, {})
    if seed is None:
        return
    yield from homomorphisms(rule.body, prefix, seed)


def find_support_ordering(inst: Instance, db: Database, onto: Ontology) -> Optional[tuple]:
    """Greedy saturation into a well-supported ordering, or None.

    Support against a prefix only grows as the prefix grows, so appending
    any currently supported atom never blocks another one.
    """
    remaining = inst.sorted_atoms()
    placed: list = []
    placed_set: set = set()
    db_atoms = set(db.atoms)
    rules = sorted(onto, key=lambda r: r.id)
    while remaining:
        step = None
        for atom in remaining:
            if atom in db_atoms:
                step = SupportStep(atom, None)
                break
            for rule in rules:
                h = next(_head_supports(rule, atom, placed_set), None)
                if h is not None:
                    step = SupportStep(atom, rule.id, h)
                    break
            if step is not None:
                break
        if step is None:
            return None
        placed.append(step)
        placed_set.add(step.atom)
        remaining.remove(step.atom)
    return tuple(placed)


def ordering_from_sequence(atoms: Iterable[Atom], db: Database, onto: Ontology) -> tuple:
    """Justify a given atom sequence as a well-supported ordering, or raise."""
    steps: list = []
    prefix: set = set()
    db_atoms = set(db.atoms)
    for atom in atoms:
        if atom in db_atoms:
            steps.append(SupportStep(atom, None))
        else:
            found = None
            for rule in sorted(onto, key=lambda r: r.id):
                h = next(_head_supports(rule, atom, prefix), None)
                if h is not None:
                    found = SupportStep(atom, rule.id, h)
                    break
            if found is None:
                raise ValueError(f"atom {atom!r} is not supported by its prefix")
            steps.append(found)
        prefix.add(atom)
    return tuple(steps)


def well_supported_core(inst: Instance, db: Database, onto: Ontology) -> Optional[Instance]:
    """Greedy shrink of a finite model to a well-supported submodel.

    Repeatedly drops an atom whose removal leaves a model containing the
    database, then checks the survivor for a support ordering.
    """
    ok, _ = is_model(inst, db, onto)
    if not ok:
        return None
    atoms = set(inst.atoms)
    db_atoms = set(db.atoms)
    changed = True
    while changed:
        changed = False
        for a in sorted(atoms - db_atoms, key=Atom.sort_key):
            candidate = Instance(frozenset(atoms - {a}))
            if is_model(candidate, db, onto)[0]:
                atoms.discard(a)
                changed = True
                break
    core = Instance(frozenset(atoms))
    if find_support_ordering(core, db, onto) is None:
        return None
    return core


def _first_violation(atoms: frozenset, onto: Ontology):
    inst = Instance(atoms)
    for rule in sorted(onto, key=lambda r: r.id):
        for h in sorted(homomorphisms(rule.body, inst),
                        key=lambda m: sorted((k.name, term_key(v)) for k, v in m.items())):
            seed = {v: h[v] for v in rule.uv if v in h}
            if find_homomorphism([rule.head], inst, seed) is None:
                return rule, h
    return None


def _is_minimal(atoms: frozenset, db_atoms: frozenset, onto: Ontology) -> bool:
    extra = sorted(atoms - db_atoms, key=Atom.sort_key)
    for size in range(len(extra)):
        for subset in combinations(extra, size):
            candidate = Instance(db_atoms | frozenset(subset))
            if is_model(candidate, Database(db_atoms), onto)[0]:
                return False
    return True


def _state_key(atoms: frozenset) -> tuple:
    """Canonical hashable key for an atom set, invariant under null renaming.

    Exhausts null permutations, so it is only used when few nulls occur.
    """
    nulls = sorted({t for a in atoms for t in a.args if isinstance(t, Null)},
                   key=term_key)
    best = None
    for perm in permutations(range(1, len(nulls) + 1)):
        ren = dict(zip(nulls, (Null(i) for i in perm)))
        key = tuple(sorted(apply_mapping(ren, a).sort_key() for a in atoms))
        if best is None or key < best:
            best = key
    return best if best is not None else tuple(sorted(a.sort_key() for a in atoms))


def enumerate_finite_models(db: Database, onto: Ontology, budget: ModelBudget) -> Iterator[Instance]:
    """All subset-minimal finite models within the budget, smallest first.

    Depth-first repair of the first rule violation, branching on every
    assignment of the existential variables over the current terms, the
    known constants, and at most max_extra_nulls fresh nulls.  Complete
    only within the budget.  Results are collected before emission so the
    order is deterministic.
    """
    consts = sorted(constants_of(db, onto))
    base_ids = [t.id for a in db for t in a.args if isinstance(t, Null)]
    next_id = max(base_ids, default=0) + 1
    fresh_pool = [Null(next_id + i) for i in range(budget.max_extra_nulls)]
    db_atoms = frozenset(db.atoms)

    found: dict = {}
    seen_states: set = set()

    def visit(atoms: frozenset, fresh_used: int):
        if len(atoms) > budget.max_atoms:
            return
        key = _state_key(atoms)
        if key in seen_states:
            return
        seen_states.add(key)
        violation = _first_violation(atoms, onto)
        if violation is None:
            found.setdefault(key, atoms)
            return
        rule, h = violation
        terms = sorted({t for a in atoms for t in a.args}, key=term_key)
        pool = terms + [c for c in consts if c not in terms]
        evs = sorted(rule.ev)

        def assign(i, mapping, used):
            if i == len(evs):
                atom = apply_mapping(mapping, rule.head)
                yield atoms | {atom}, used
                return
            options = list(pool)
            if used < budget.max_extra_nulls:
                options.append(fresh_pool[used])
            for t in options:
                mapping[evs[i]] = t
                bump = 1 if used < budget.max_extra_nulls and t == fresh_pool[used] else 0
                yield from assign(i + 1, mapping, used + bump)
            del mapping[evs[i]]

        for state, used in assign(0, dict(h), fresh_used):
            visit(state, used)

    visit(db_atoms, 0)
    minimal = [m for m in found.values() if _is_minimal(m, db_atoms, onto)]
    minimal.sort(key=lambda m: (len(m), sorted(a.sort_key() for a in m)))
    for atoms in minimal:
        yield Instance(atoms)


def find_finite_countermodel(db: Database, onto: Ontology, q: Query,
                             budget: ModelBudget) -> Optional[Instance]:
    """First minimal finite model within budget that does not satisfy q.

    Sound for any budget: a reported instance really is a countermodel.
    If some finite model avoids q, so does any of its minimal submodels,
    hence searching minimal models loses nothing within the budget.
    """
    for model in enumerate_finite_models(db, onto, budget):
        if satisfies_query(model, q) is None:
            return model
    return None


def smooth_instance(model: Instance):
    """Copy of the instance with argument constants replaced by fresh nulls;
    returns (instance, bijection on terms).  Shape labels are untouched."""
    null_ids = [t.id for t in model.terms() if isinstance(t, Null)]
    next_id = max(null_ids, default=0) + 1
    mapping: dict = {}
    for t in sorted(model.terms(), key=term_key):
        if isinstance(t, Constant):
            mapping[t] = Null(next_id)
            next_id += 1
        else:
            mapping[t] = t
    atoms = frozenset(apply_mapping(mapping, a) for a in model)
    return Instance(atoms), mapping


# ---------------------------------------------------------------------------
# propagation orderings


@dataclass(frozen=True, order=True)
class StartingPoint:
    """Fresh term recording where an existentially supported term was born:
    atom_index is its 1-based rank in the ordering, position the 1-based
    argument slot."""

    term: object
    atom_index: int
    position: int

    def __repr__(self):
        return f"<{self.term!r},{self.atom_index},{self.position}>"


def _supports_at(ordering: tuple, j: int, onto: Ontology) -> list:
    """All (rule, mapping) pairs supporting the j-th atom from the strict prefix."""
    atom = ordering[j - 1].atom
    prefix = {step.atom for step in ordering[: j - 1]}
    out = []
    for rule in sorted(onto, key=lambda r: r.id):
        for h in _head_supports(rule, atom, prefix):
            out.append((rule, h))
    return out


def propagation_ordering(ordering: tuple, onto: Ontology) -> tuple:
    """Annotated copy of a well-supported ordering under a joinless ontology.

    Per argument, in order of precedence: existential positions of
    existentially supported atoms become StartingPoints; terms propagated
    from an earlier atom copy that atom's annotation (smallest source
    first); everything else stays as is.
    """
    local = classify_local(onto)
    if not local["joinless"][0]:
        raise ValueError(f"ontology is not joinless: {local['joinless'][1].describe()}")
    annotated: list = []
    for j, step in enumerate(ordering, 1):
        atom = step.atom
        if step.from_database:
            supports = []
        else:
            supports = _supports_at(ordering, j, onto)
        ex_supported = bool(supports) and all(rule.ev for rule, _ in supports)
        args = []
        for k, t in enumerate(atom.args, 1):
            if ex_supported and all(rule.head.args[k - 1] in rule.ev for rule, _ in supports):
                args.append(StartingPoint(t, j, k))
                continue
            sources = []
            for rule, h in supports:
                for body_atom in rule.body:
                    image = apply_mapping(h, body_atom)
                    for i in range(1, j):
                        if ordering[i - 1].atom == image:
                            for l, u in enumerate(image.args, 1):
                                if u == t:
                                    sources.append((i, l))
            if sources:
                i, l = min(sources)
                args.append(annotated[i - 1].args[l - 1])
            else:
                args.append(t)
        annotated.append(Atom(atom.pred, tuple(args), atom.shape))
    return tuple(annotated)


# ---------------------------------------------------------------------------
# join-breaking repair


def _slot_atom(pred, shape, terms) -> Atom:
    return Atom(pred, tuple(terms), shape)


def disjoin_repair(model: Instance, ordering: tuple, full_onto: Ontology):
    """Turn a well-supported model of the active part into one of the full
    canonical ontology.

    Matches of join-carrying (harmless) rule bodies are destroyed by
    activating starting points: the joined term is replaced, at its birth
    atom and every slot annotated with the same starting point, by the
    starting point itself.  Afterwards any rule left unsatisfied is closed
    by adding head atoms whose images under the returned mapping lie in
    the input model, so the result still maps into it.
    """
    active, harmless = partition_active_harmless(full_onto)
    if {step.atom for step in ordering} != set(model.atoms):
        raise ValueError("ordering does not cover the model")
    annotation = propagation_ordering(ordering, active)

    entries = [
        {
            "pred": step.atom.pred,
            "shape": step.atom.shape,
            "terms": list(step.atom.args),
            "ann": list(annotation[j].args),
        }
        for j, step in enumerate(ordering)
    ]
    activated: set = set()
    skipped: set = set()

    def activate(sp: StartingPoint):
        activated.add(sp)
        for entry in entries:
            for k, ann in enumerate(entry["ann"]):
                if ann == sp:
                    entry["terms"][k] = sp

    def current_atoms() -> set:
        return {_slot_atom(e["pred"], e["shape"], e["terms"]) for e in entries}

    def break_one() -> bool:
        inst = current_atoms()
        for rule in sorted(harmless, key=lambda r: r.id):
            for h in homomorphisms(rule.body, inst):
                key = (rule.id, frozenset(apply_mapping(h, b) for b in rule.body))
                if key in skipped:
                    continue
                joined = sorted(
                    v for v in rule.uv
                    if sum(1 for b in rule.body if v in set(b.variables())) > 1
                )
                fresh = []
                for var in joined:
                    for body_atom in rule.body:
                        if var not in set(body_atom.variables()):
                            continue
                        image = apply_mapping(h, body_atom)
                        for e in entries:
                            if _slot_atom(e["pred"], e["shape"], e["terms"]) != image:
                                continue
                            for k, arg in enumerate(body_atom.args):
                                if arg == var:
                                    ann = e["ann"][k]
                                    if isinstance(ann, StartingPoint) and ann not in activated:
                                        fresh.append(ann)
                if fresh:
                    for sp in sorted(set(fresh)):
                        activate(sp)
                    return True
                skipped.add(key)
        return False

    def mapped_back(t):
        return t.term if isinstance(t, StartingPoint) else t

    def close_one() -> bool:
        inst = Instance(frozenset(current_atoms()))
        violation = _first_violation(inst.atoms, full_onto)
        if violation is None:
            return False
        rule, h = violation
        seed = {v: mapped_back(h[v]) for v in rule.uv if v in h}
        ext = find_homomorphism([rule.head], model, seed)
        if ext is None:
            raise ValueError(f"repair cannot satisfy rule {rule.id} inside the model")
        args = []
        for t in rule.head.args:
            if t in rule.ev:
                args.append(ext[t])
            else:
                args.append(h.get(t, t))
        new_atom = Atom(rule.head.pred, tuple(args), rule.head.shape)
        entries.append({
            "pred": new_atom.pred,
            "shape": new_atom.shape,
            "terms": list(new_atom.args),
            "ann": list(new_atom.args),
        })
        return True

    while break_one():
        pass
    while close_one():
        while break_one():
            pass

    repaired = Instance(frozenset(current_atoms()))
    h_prime = {sp: sp.term for sp in activated}
    return repaired, h_prime
