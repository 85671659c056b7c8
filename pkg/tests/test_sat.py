import random

import pytest
from hypothesis import given, strategies as st

from conftest import formulas
from vplab.errors import FormulaError, ParseError, StructureError
from vplab.gen import random_structure
from vplab.hf import nat, tuple_space
from vplab.sat import (Structure, evaluate, format_structure, inject_fault, parse_structure,
                       sat, sat_oracle, sentence_holds)
from vplab.syntax import (And, Const, Eq, Exists, Not, RAtom, UAtom, Var, encode, fold,
                          parse_formula, slot_count)

C2 = [nat(0), nat(1)]


def structures(consts=C2, injective=True, max_size=4):
    return st.integers(0, 2 ** 32).map(
        lambda seed: random_structure(random.Random(seed), max_size, consts, injective))


def full_env(S, n, data):
    return {i: data.draw(st.sampled_from(S.elements)) for i in range(n)}


@given(structures(), formulas(consts=C2), st.data())
def test_oracle_agrees_with_evaluator(S, phi, data):
    env = full_env(S, 3, data)
    m = slot_count(phi)
    truth, g = sat_oracle(S, phi, {i: env[i] for i in range(m)})
    assert truth == evaluate(S, phi, env)
    space = set(tuple_space(m, S.M))
    assert all(gk <= space for gk in g)


@given(structures(injective=False), formulas(consts=C2), st.data())
def test_agreement_without_constant_equations(S, phi, data):
    const_eq = fold(phi, lambda a: isinstance(a, Eq) and isinstance(a.left, Const)
                    and isinstance(a.right, Const) and a.left.a is not a.right.a,
                    lambda x: x, lambda x, y: x or y, lambda v, x: x)
    env = full_env(S, 3, data)
    truth, _ = sat_oracle(S, phi, env)
    if not const_eq:
        assert truth == evaluate(S, phi, env)


@given(structures(), formulas(consts=C2))
def test_negation_clause_is_complement(S, phi):
    m = slot_count(phi)
    space = tuple_space(m, S.M)
    fc = encode(Not(phi), S.language)
    _, g = sat_oracle(S, fc, space.elements[0], m)
    inner = g[fc.witness.index(encode(phi, S.language).code)]
    assert g[-1] == frozenset(space) - inner


def _rename(phi, perm):
    def term(t):
        return Var(perm[t.n]) if isinstance(t, Var) else t

    def atom(a):
        if isinstance(a, Eq):
            return Eq(term(a.left), term(a.right))
        if isinstance(a, UAtom):
            return UAtom(term(a.term))
        return RAtom(term(a.left), term(a.right))
    return fold(phi, atom, Not, And, lambda v, b: Exists(perm[v], b))


@given(structures(), formulas(consts=C2), st.permutations([0, 1, 2]), st.data())
def test_renaming_invariance(S, phi, perm, data):
    env = full_env(S, 3, data)
    renamed = _rename(phi, perm)
    env2 = {perm[i]: x for i, x in env.items()}
    assert sat_oracle(S, phi, env, m=3)[0] == sat_oracle(S, renamed, env2, m=3)[0]


def test_empty_domain():
    S = Structure.build([], predicates=("U",))
    T = Structure.build([nat(0)], predicates=("U",))
    phi = parse_formula("E v0. v0=v0")
    assert sentence_holds(T, phi)
    assert not sentence_holds(S, phi)
    assert len(tuple_space(1, S.M)) == 0


def test_constant_equation_quirk():
    S = Structure.build([nat(0), nat(1)], I={nat(0): nat(0), nat(1): nat(0)})
    phi = Eq(Const(nat(0)), Const(nat(1)))
    assert evaluate(S, phi)
    assert not sat_oracle(S, phi, ())[0]
    assert sat_oracle(S, Eq(Const(nat(0)), Const(nat(0))), ())[0]


def test_sat_needs_free_variables():
    S = Structure.build([nat(0)])
    with pytest.raises(FormulaError):
        sat(S, UAtom(Var(1)), {})
    assert sat(S, Exists(0, Eq(Var(0), Var(0))), {})


def test_structure_validation():
    with pytest.raises(StructureError):
        Structure.build([nat(0)], U=[nat(1)])
    with pytest.raises(StructureError):
        Structure.build([nat(0)], R=[(nat(0), nat(2))])
    with pytest.raises(StructureError):
        Structure.build([nat(0)], I={nat(0): nat(3)})
    with pytest.raises(StructureError):
        evaluate(Structure.build([nat(0)]), UAtom(Const(nat(0))))


def test_fault_injection_is_detected():
    S = Structure.build([nat(0), nat(1)], U=[nat(0)])
    phi = Not(UAtom(Var(0)))
    env = {0: nat(0)}
    assert sat_oracle(S, phi, env)[0] == evaluate(S, phi, env)
    with inject_fault("negation"):
        assert sat_oracle(S, phi, env)[0] != evaluate(S, phi, env)
    assert sat_oracle(S, phi, env)[0] == evaluate(S, phi, env)
    with pytest.raises(ValueError):
        with inject_fault("nonsense"):
            pass


STRUCT = """
% a small chain
domain: 0, 1, {n:1}
U: 0
R: (0, 1), (1, {n:1})
I: a -> 0, b -> {n:1}
"""


def test_structure_file_round_trip():
    S, names = parse_structure(STRUCT, "chain")
    assert len(S.elements) == 3 and S.name == "chain"
    assert set(names) == {"a", "b"}
    assert evaluate(S, parse_formula("R(c:a, v0)", names), {0: nat(1)})
    S2, names2 = parse_structure(format_structure(S, names))
    assert S2 == S and names2 == names


@pytest.mark.parametrize("bad", ["U: 0", "domain: 0\nU: 0\nU: 0", "junk\ndomain: 0",
                                 "domain: 0\nR: 0", "domain: 0\nI: a"])
def test_structure_file_errors(bad):
    with pytest.raises((ParseError, StructureError)):
        parse_structure(bad)
