"""Finite models: checking, support orderings, enumeration, propagation
annotations and the join-breaking repair."""

import pytest

from shychase.canonical import partition_active_harmless, rewrite_theory, unpack
from shychase.chase import OBLIVIOUS, ChaseConfig, run_chase
from shychase.core import Atom, Constant, Database, Instance, Null, Variable
from shychase.finitemodels import (
    ModelBudget,
    StartingPoint,
    disjoin_repair,
    enumerate_finite_models,
    find_finite_countermodel,
    find_support_ordering,
    is_model,
    ordering_from_sequence,
    propagation_ordering,
    smooth_instance,
    well_supported_core,
)
from shychase.harness import load_paper_program
from shychase.hom import apply_mapping, isomorphic, satisfies_query
from shychase.parse import parse_program, parse_query

CLOSURE = """
e(a,b). e(b,c).
e(X,Y) -> t(X,Y).
e(X,Y), t(Y,Z) -> t(X,Z).
"""


def test_model_budget_validation():
    with pytest.raises(ValueError):
        ModelBudget(-1, 5)
    with pytest.raises(ValueError):
        ModelBudget(0, 0)


def test_is_model_flags_missing_fact_and_rule_violation():
    program = parse_program(CLOSURE)
    empty = Instance(frozenset())
    ok, violation = is_model(empty, program.database, program.ontology)
    assert not ok and violation[0] is None
    facts_only = Instance(program.database.atoms)
    ok, violation = is_model(facts_only, program.database, program.ontology)
    assert not ok and violation[0].id == "r1"


def test_chase_fixpoint_is_a_model():
    # [DERIVED] a terminated chase is a model by construction
    program = parse_program(CLOSURE)
    result = run_chase(program.database, program.ontology, ChaseConfig(OBLIVIOUS, 100, 50))
    assert result.terminated
    assert is_model(result.instance, program.database, program.ontology)[0]


def test_support_ordering_follows_derivations():
    program = parse_program(CLOSURE)
    result = run_chase(program.database, program.ontology, ChaseConfig(OBLIVIOUS, 100, 50))
    ordering = find_support_ordering(result.instance, program.database, program.ontology)
    assert ordering is not None
    placed = set()
    for step in ordering:
        if step.from_database:
            assert step.atom in program.database.atoms
        else:
            assert step.mapping is not None
        placed.add(step.atom)
    assert placed == set(result.instance.atoms)


def test_unsupported_atom_blocks_ordering():
    """An atom no rule can derive has no support ordering."""
    program = parse_program(CLOSURE)
    padded = Instance(program.database.atoms | {Atom("t", (Constant("c"), Constant("a")))})
    assert find_support_ordering(padded, program.database, program.ontology) is None


def test_ordering_from_sequence_validates_prefix_support():
    program = parse_program(CLOSURE)
    a, b = Constant("a"), Constant("b")
    good = [Atom("e", (a, b)), Atom("t", (a, b))]
    steps = ordering_from_sequence(good, program.database, program.ontology)
    assert steps[1].rule_id == "r1"
    with pytest.raises(ValueError):
        ordering_from_sequence([Atom("t", (a, b))], program.database, program.ontology)


def test_well_supported_core_drops_unfounded_extras():
    """[DERIVED] Extra self-justified atoms disappear from the core."""
    text = "p(c). p(X) -> q(X). r(X) -> r(X)."
    program = parse_program(text)
    model = Instance(frozenset({
        Atom("p", (Constant("c"),)),
        Atom("q", (Constant("c"),)),
        Atom("r", (Constant("c"),)),
    }))
    core = well_supported_core(model, program.database, program.ontology)
    assert core is not None
    assert Atom("r", (Constant("c"),)) not in core
    assert well_supported_core(Instance(frozenset()), program.database,
                               program.ontology) is None


def test_enumerate_finite_models_on_datalog_gives_the_fixpoint():
    """[DERIVED] A datalog theory has exactly one minimal model: the chase."""
    program = parse_program(CLOSURE)
    chase = run_chase(program.database, program.ontology, ChaseConfig(OBLIVIOUS, 100, 50))
    models = list(enumerate_finite_models(program.database, program.ontology,
                                          ModelBudget(0, 10)))
    assert len(models) == 1
    assert models[0] == chase.instance


def test_enumerate_finite_models_minimality_and_order():
    program = parse_program("s(c). s(X) -> exists Y. p(Y).")
    models = list(enumerate_finite_models(program.database, program.ontology,
                                          ModelBudget(1, 4)))
    # reuse of c and one fresh null, both minimal, smallest first
    assert len(models) == 2
    assert all(len(m) == 2 for m in models)
    for m in models:
        assert is_model(m, program.database, program.ontology)[0]
    sizes = [sorted(a.sort_key() for a in m) for m in models]
    assert sizes == sorted(sizes)


def test_find_finite_countermodel_is_sound():
    program = parse_program("p(c). p(X) -> exists Y. f(Y,X).")
    q = parse_query("? f(c,c).")
    counter = find_finite_countermodel(program.database, program.ontology, q,
                                       ModelBudget(2, 6))
    assert counter is not None
    assert is_model(counter, program.database, program.ontology)[0]
    assert satisfies_query(counter, q) is None
    held = parse_query("? p(c).")
    assert find_finite_countermodel(program.database, program.ontology, held,
                                    ModelBudget(2, 6)) is None


def test_smooth_instance_renames_constants_bijectively():
    inst = Instance(frozenset({
        Atom("p", (Constant("a"), Null(1)), (1, 2)),
        Atom("q", (Constant("b"),), (1,)),
    }))
    smooth, mapping = smooth_instance(inst)
    assert len(set(mapping.values())) == len(mapping)
    assert all(isinstance(t, Null) for t in smooth.terms())
    assert {a.shape for a in smooth} == {a.shape for a in inst}


def test_smooth_instance_of_canonical_model_is_a_model():
    """[DERIVED] Constant-free canonical rules cannot tell constants from
    nulls, so smoothing preserves modelhood."""
    program = load_paper_program("theorem8.dlp")
    dbc, ontoc, _ = rewrite_theory(program.database, program.ontology)
    chase = run_chase(dbc, ontoc, ChaseConfig(OBLIVIOUS, 100, 50))
    assert chase.terminated
    smooth, _ = smooth_instance(chase.instance)
    assert is_model(smooth, Database(frozenset()), ontoc)[0]


def test_propagation_ordering_requires_joinless():
    program = parse_program("p(c). p(X), q(X) -> r(X).")
    with pytest.raises(ValueError):
        propagation_ordering((), program.ontology)


def test_propagation_ordering_golden():
    """[PAPER] Two birthplaces and their propagations, annotated verbatim."""
    program = load_paper_program("propagation.dlp")
    c1, c2, n1 = Constant("c1"), Constant("c2"), Null(1)
    sequence = [
        Atom("s", (c1,)),
        Atom("p", (c1, c2)),
        Atom("p", (c1, n1)),
        Atom("u", (c2, c1)),
        Atom("t", (c2,)),
        Atom("u", (n1, c1)),
        Atom("r", (n1, c1)),
        Atom("t", (n1,)),
        Atom("r", (c2, c1)),
    ]
    ordering = ordering_from_sequence(sequence, program.database, program.ontology)
    annotated = propagation_ordering(ordering, program.ontology)
    sp22, sp32 = StartingPoint(c2, 2, 2), StartingPoint(n1, 3, 2)
    sp41, sp61 = StartingPoint(c2, 4, 1), StartingPoint(n1, 6, 1)
    assert annotated == (
        Atom("s", (c1,)),
        Atom("p", (c1, sp22)),
        Atom("p", (c1, sp32)),
        Atom("u", (sp41, c1)),
        Atom("t", (sp22,)),
        Atom("u", (sp61, c1)),
        Atom("r", (sp32, c1)),
        Atom("t", (sp32,)),
        Atom("r", (sp22, c1)),
    )


def test_starting_point_repr_carries_provenance():
    sp = StartingPoint(Null(1), 3, 2)
    assert repr(sp) == "<Null(1),3,2>"


def test_disjoin_repair_golden():
    """[PAPER] The joined null splits into two starting points and the
    repaired model still maps back into the original one."""
    program = load_paper_program("theorem8.dlp")
    dbc, ontoc, _ = rewrite_theory(program.database, program.ontology)
    active, _ = partition_active_harmless(ontoc)
    model = Instance(frozenset({
        Atom("s", (), ("c",)),
        Atom("p", (Null(1),), (1,)),
        Atom("r", (Null(1),), (1,)),
    }))
    ordering = find_support_ordering(model, dbc, active)
    assert ordering is not None
    repaired, h_prime = disjoin_repair(model, ordering, ontoc)
    expected = Instance(frozenset({
        Atom("s", (), ("c",)),
        Atom("p", (Null(1),), (1,)),
        Atom("r", (Null(2),), (1,)),
    }))
    assert isomorphic(repaired, expected)
    assert is_model(repaired, dbc, ontoc)[0]
    assert {apply_mapping(h_prime, a) for a in repaired} <= set(model.atoms)
    # both starting points collapse back onto the joined null
    assert set(h_prime.values()) == {Null(1)}


def test_disjoin_repair_is_identity_without_harmless_joins():
    # [TRIVIAL]
    program = load_paper_program("father.dlp")
    dbc, ontoc, _ = rewrite_theory(program.database, program.ontology)
    active, _ = partition_active_harmless(ontoc)
    # each null is its own father, closing the infinite ancestry finitely
    model = Instance(frozenset({
        Atom("p", (), ("c1",)),
        Atom("p", (), ("c2",)),
        Atom("f", (), ("c1", "c2")),
        Atom("f", (Null(1),), (1, "c1")),
        Atom("f", (Null(2),), (1, "c2")),
        Atom("p", (Null(1),), (1,)),
        Atom("p", (Null(2),), (1,)),
        Atom("f", (Null(1), Null(1)), (1, 2)),
        Atom("f", (Null(2), Null(2)), (1, 2)),
    }))
    assert is_model(model, dbc, ontoc)[0]
    ordering = find_support_ordering(model, dbc, active)
    assert ordering is not None
    repaired, h_prime = disjoin_repair(model, ordering, ontoc)
    assert isomorphic(repaired, model)
