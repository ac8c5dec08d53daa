"""Chase engine: golden prefixes, datalog oracles, modes and bounds."""

import pytest

from shychase.chase import (
    OBLIVIOUS,
    RESTRICTED,
    ChaseConfig,
    Verdict,
    entails,
    run_chase,
)
from shychase.core import Atom, Constant, Null
from shychase.parse import parse_program, parse_query, print_atom

FATHER = """
p(c1). p(c2). f(c1,c2).
p(X) -> exists Y. f(Y,X).
f(X,Y) -> p(X).
"""


def test_chase_config_validation():
    with pytest.raises(ValueError):
        ChaseConfig("eager", 10, 10)
    with pytest.raises(ValueError):
        ChaseConfig(OBLIVIOUS, 0, 10)


def test_father_chase_prefix_golden():
    """First three rounds of the everyone-has-a-father chase.

    Round one derives fathers for both named people, round two makes the
    fathers people, round three gives the fathers fathers.
    """
    program = parse_program(FATHER)
    result = run_chase(program.database, program.ontology, ChaseConfig(OBLIVIOUS, 12, 3))
    produced = [(s.round, print_atom(s.produced)) for s in result.steps]
    assert produced == [
        (1, "f(_:n1,c1)"),
        (1, "f(_:n2,c2)"),
        (2, "p(_:n1)"),
        (2, "p(_:n2)"),
        (3, "f(_:n3,_:n1)"),
        (3, "f(_:n4,_:n2)"),
    ]
    assert not result.terminated


def test_prefix_at_round_reconstructs_rounds():
    program = parse_program(FATHER)
    result = run_chase(program.database, program.ontology, ChaseConfig(OBLIVIOUS, 12, 3))
    assert result.prefix_at_round(0).atoms == program.database.atoms
    assert len(result.prefix_at_round(1)) == 5
    assert result.prefix_at_round(3) == result.instance


def transitive_closure(edges):
    closure = set(edges)
    changed = True
    while changed:
        changed = False
        for a, b in list(closure):
            for c, d in list(closure):
                if b == c and (a, d) not in closure:
                    closure.add((a, d))
                    changed = True
    return closure


def test_datalog_chase_computes_transitive_closure():
    """[DERIVED] On a datalog reachability program the chase fixpoint must
    equal an independently computed transitive closure."""
    text = """
    e(a,b). e(b,c). e(c,d). e(b,a).
    e(X,Y) -> t(X,Y).
    e(X,Y), t(Y,Z) -> t(X,Z).
    """
    program = parse_program(text)
    result = run_chase(program.database, program.ontology, ChaseConfig(OBLIVIOUS, 500, 100))
    assert result.terminated
    got = {(a.args[0].name, a.args[1].name) for a in result.instance if a.pred == "t"}
    edges = {(a.args[0].name, a.args[1].name) for a in program.database}
    assert got == transitive_closure(edges)


def test_chase_is_reproducible():
    program = parse_program(FATHER)
    cfg = ChaseConfig(OBLIVIOUS, 40, 6)
    first = run_chase(program.database, program.ontology, cfg)
    second = run_chase(program.database, program.ontology, cfg)
    assert first.instance == second.instance
    assert first.steps == second.steps


def test_restricted_chase_reuses_witnesses():
    """The restricted chase sees f(c1,c2) as a father for c2 and stops the
    oblivious duplicate, so p(c2) never spawns a fresh parent."""
    program = parse_program(FATHER)
    oblivious = run_chase(program.database, program.ontology, ChaseConfig(OBLIVIOUS, 10, 1))
    restricted = run_chase(program.database, program.ontology, ChaseConfig(RESTRICTED, 10, 1))
    fresh = lambda res: {s.produced for s in res.steps if s.round == 1}
    assert len(fresh(oblivious)) == 2
    assert len(fresh(restricted)) == 1


def test_modes_agree_on_datalog():
    """[DERIVED] Without existentials both modes reach the same fixpoint."""
    text = "e(a,b). e(b,c). e(X,Y) -> t(X,Y). e(X,Y), t(Y,Z) -> t(X,Z)."
    program = parse_program(text)
    cfg = lambda mode: ChaseConfig(mode, 200, 50)
    assert (run_chase(program.database, program.ontology, cfg(OBLIVIOUS)).instance
            == run_chase(program.database, program.ontology, cfg(RESTRICTED)).instance)


def test_atom_bound_reports_unterminated_with_complete_rounds():
    program = parse_program(FATHER)
    result = run_chase(program.database, program.ontology, ChaseConfig(OBLIVIOUS, 6, 50))
    assert not result.terminated
    assert result.complete_rounds == result.rounds - 1
    assert len(result.instance) <= 7


def test_oblivious_fires_each_trigger_once():
    program = parse_program("p(c). p(X) -> q(X). q(X) -> q(X).")
    result = run_chase(program.database, program.ontology, ChaseConfig(OBLIVIOUS, 50, 50))
    assert result.terminated
    assert result.instance.atoms == {
        Atom("p", (Constant("c"),)), Atom("q", (Constant("c"),))
    }


def test_entails_three_valued():
    program = parse_program(FATHER)
    cfg = ChaseConfig(RESTRICTED, 50, 20)
    yes = entails(program.database, program.ontology, parse_query("? p(c1)."), cfg)
    assert yes.verdict is Verdict.TRUE and bool(yes)
    assert yes.witness is not None
    # only a finished chase can return a decisive False
    finite = parse_program("p(c). p(X) -> q(X).")
    no = entails(finite.database, finite.ontology, parse_query("? r(c)."), cfg)
    assert no.verdict is Verdict.FALSE
    tight = ChaseConfig(OBLIVIOUS, 8, 2)
    unknown = entails(program.database, program.ontology,
                      parse_query("? f(c2,c2)."), tight)
    assert unknown.verdict is Verdict.UNKNOWN and not unknown
