"""Homomorphism search and null-renaming isomorphism against brute force."""

from itertools import permutations, product

from hypothesis import given, settings
from hypothesis import strategies as st

from shychase.core import Atom, Constant, Instance, Null, Query, Variable
from shychase.hom import (
    apply_mapping,
    compose,
    find_homomorphism,
    homomorphisms,
    isomorphic,
    satisfies_query,
)

constants = st.sampled_from([Constant("a"), Constant("b")])
nulls = st.sampled_from([Null(1), Null(2), Null(3)])
ground_terms = st.one_of(constants, nulls)
variables = st.sampled_from([Variable("X"), Variable("Y"), Variable("Z")])
src_terms = st.one_of(constants, variables)


def atoms(term_strategy, max_atoms=4):
    atom = st.tuples(st.sampled_from("pq"), st.tuples(term_strategy, term_strategy))
    return st.lists(atom, min_size=1, max_size=max_atoms).map(
        lambda rows: [Atom(p, args) for p, args in rows]
    )


def brute_homomorphisms(src, target):
    """All variable assignments whose atom images land in the target."""
    variables = sorted({v for a in src for v in a.variables()},
                       key=lambda v: v.name)
    terms = sorted({t for a in target for t in a.args}, key=repr)
    found = []
    for combo in product(terms, repeat=len(variables)):
        h = dict(zip(variables, combo))
        if all(apply_mapping(h, a) in set(target) for a in src):
            found.append(h)
    return found


@settings(max_examples=60, deadline=None)
@given(atoms(src_terms, 3), atoms(ground_terms, 4))
def test_homomorphisms_match_brute_force(src, target):
    """[DERIVED] Backtracking search finds exactly the brute-force maps."""
    got = {frozenset(h.items()) for h in homomorphisms(src, target)}
    want = {frozenset(h.items()) for h in brute_homomorphisms(src, target)}
    assert got == want


def test_homomorphism_seed_is_respected():
    src = [Atom("p", (Variable("X"), Variable("Y")))]
    target = [Atom("p", (Constant("a"), Constant("b"))),
              Atom("p", (Constant("b"), Constant("b")))]
    seed = {Variable("X"): Constant("b")}
    maps = list(homomorphisms(src, target, seed))
    assert maps == [{Variable("X"): Constant("b"), Variable("Y"): Constant("b")}]


def test_find_homomorphism_none_when_predicate_missing():
    assert find_homomorphism([Atom("r", (Variable("X"),))],
                             [Atom("p", (Constant("a"),))]) is None


def test_compose_applies_inner_then_outer():
    inner = {Variable("X"): Null(1)}
    outer = {Null(1): Constant("a"), Variable("Y"): Null(2)}
    combined = compose(outer, inner)
    assert combined[Variable("X")] == Constant("a")
    assert combined[Variable("Y")] == Null(2)


def brute_isomorphic(a, b):
    """Try every bijection between the null sets (constants stay fixed)."""
    a, b = set(a), set(b)
    na = sorted({t for x in a for t in x.args if isinstance(t, Null)}, key=repr)
    nb = sorted({t for x in b for t in x.args if isinstance(t, Null)}, key=repr)
    if len(na) != len(nb):
        return False
    for perm in permutations(nb):
        ren = dict(zip(na, perm))
        if {apply_mapping(ren, x) for x in a} == b:
            return True
    return False


@settings(max_examples=60, deadline=None)
@given(atoms(ground_terms, 4), atoms(ground_terms, 4))
def test_isomorphic_matches_brute_force(a, b):
    # [DERIVED] permutation search is the oracle
    assert isomorphic(set(a), set(b)) == brute_isomorphic(a, b)


@settings(max_examples=40, deadline=None)
@given(atoms(ground_terms, 5))
def test_isomorphic_is_invariant_under_null_shifts(atoms_):
    """[DERIVED] Shifting every null id yields an isomorphic copy."""
    shift = {n: Null(n.id + 10)
             for a in atoms_ for n in a.args if isinstance(n, Null)}
    shifted = {apply_mapping(shift, a) for a in atoms_}
    assert isomorphic(set(atoms_), shifted)


def test_isomorphic_distinguishes_join_structure():
    a = {Atom("p", (Null(1), Null(1)))}
    b = {Atom("p", (Null(1), Null(2)))}
    assert not isomorphic(a, b)


def test_isomorphic_handles_repeated_nulls():
    # regression: a triple-repeated null must map onto itself
    a = {Atom("p", (Null(1), Null(1), Null(1)))}
    assert isomorphic(a, a)
    assert isomorphic(a, {Atom("p", (Null(4), Null(4), Null(4)))})


def test_isomorphic_on_instances_and_constants():
    a = Instance(frozenset({Atom("p", (Constant("a"), Null(1)))}))
    b = Instance(frozenset({Atom("p", (Constant("b"), Null(1)))}))
    assert isomorphic(a, a)
    assert not isomorphic(a, b)


def test_isomorphic_scales_to_similar_null_clusters():
    """Many interchangeable nulls stay tractable through color pruning."""
    a = {Atom("p", (Null(i), Null(i + 100))) for i in range(40)}
    b = {Atom("p", (Null(i + 7), Null(i + 300))) for i in range(40)}
    assert isomorphic(a, b)
    c = set(b) | {Atom("p", (Null(5000), Null(5000)))}
    c.remove(Atom("p", (Null(7), Null(300))))
    assert not isomorphic(a, c)


def test_satisfies_query_reports_first_disjunct():
    inst = Instance(frozenset({Atom("p", (Constant("a"),)),
                               Atom("q", (Constant("a"),))}))
    q = Query(((Atom("r", (Variable("X"),)),),
               (Atom("p", (Variable("X"),)), Atom("q", (Variable("X"),)))))
    witness = satisfies_query(inst, q)
    assert witness is not None
    assert witness.disjunct == 1
    assert witness.mapping[Variable("X")] == Constant("a")
    missing = Query(((Atom("r", (Variable("X"),)),),))
    assert satisfies_query(inst, missing) is None
