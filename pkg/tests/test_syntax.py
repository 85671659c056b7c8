import pytest
from hypothesis import given

from conftest import formulas
from vplab.errors import FormulaError, GuardExceeded, ParseError
from vplab.hf import EMPTY, kpair, nat, tup
from vplab.syntax import (And, Const, Eq, Exists, Forall, Implies, Language, Not, Or, RAtom,
                          UAtom, Var, check_fml, code_of, decode, encode, enum_formulas, fml,
                          fold, format_formula, formula_basis, fv, parse_formula, qrank, size,
                          subformula_codes, subformulas, check_well_formed)

L0 = Language.of()
L2 = Language.of([nat(0), nat(1)])


def test_symbol_codes():
    assert Var(2).code() is kpair(nat(0), nat(2))
    assert Const(nat(4)).code() is kpair(nat(1), nat(4))
    assert code_of(Eq(Var(0), Var(1))) is tup(nat(2), Var(0).code(), Var(1).code())
    heads = {code_of(p) for p in [Not(Eq(Var(0), Var(0))), And(UAtom(Var(0)), UAtom(Var(0))),
                                   Exists(0, UAtom(Var(0)))]}
    assert len(heads) == 3


@given(formulas(consts=[nat(0), nat(1)]))
def test_decode_encode_identity(phi):
    fc = encode(phi, L2)
    assert decode(fc.code, L2) == phi
    assert fc.witness[-1] is fc.code
    assert code_of(decode(fc.code, L2)) is fc.code


@given(formulas())
def test_witness_is_minimal(phi):
    fc = encode(phi, L0)
    assert check_fml(fc.code, fc.witness, fc.length, L0)
    assert fc.length == len(subformula_codes(fc.code, L0))
    assert fc.length == len(set(subformulas(phi)))


@given(formulas())
def test_padded_witness_rejected(phi):
    fc = encode(phi, L0)
    padded = fc.witness[:1] + fc.witness
    assert fml(fc.code, padded, len(padded), L0)
    assert not check_fml(fc.code, padded, len(padded), L0)


def test_witness_order_matters():
    phi = Not(UAtom(Var(0)))
    fc = encode(phi, L0)
    rev = tuple(reversed(fc.witness))
    assert not fml(fc.code, rev, len(rev), L0)


def test_decode_rejects_junk():
    with pytest.raises(FormulaError):
        decode(nat(3), L0)
    with pytest.raises(FormulaError):
        decode(kpair(nat(9), EMPTY), L0)


def test_language_checks():
    with pytest.raises(FormulaError):
        check_well_formed(UAtom(Const(nat(7))), L2)
    with pytest.raises(FormulaError):
        check_well_formed(UAtom(Var(0)), Language.of(predicates=("R",)))


@given(formulas())
def test_closure_induction(phi):
    # a predicate holding on atoms and preserved by the constructors holds everywhere
    n = fold(phi, lambda a: 1, lambda x: x + 1, lambda x, y: x + y + 1, lambda v, x: x + 1)
    assert n == size(phi)
    text = format_formula(phi)
    depth, ok = 0, True
    for ch in text:
        depth += {"(": 1, ")": -1}.get(ch, 0)
        ok &= depth >= 0
    assert ok and depth == 0


@given(formulas(consts=[nat(0), nat(1)]))
def test_text_round_trip(phi):
    assert parse_formula(format_formula(phi)) == phi


def test_parser_examples():
    phi = parse_formula("E v0. (R(v0, c:1) & !U(v0))")
    assert phi == Exists(0, And(RAtom(Var(0), Const(nat(1))), Not(UAtom(Var(0)))))
    assert parse_formula("c:a = v1", {"a": nat(5)}) == Eq(Const(nat(5)), Var(1))
    assert parse_formula("A v0. U(v0)") == Forall(0, UAtom(Var(0)))
    assert parse_formula("(U(v0) | U(v1))") == Or(UAtom(Var(0)), UAtom(Var(1)))
    assert parse_formula("(U(v0) -> U(v1))") == Implies(UAtom(Var(0)), UAtom(Var(1)))


@pytest.mark.parametrize("bad", ["", "U(v0", "E v0 U(v0)", "R(v0)", "(U(v0) & )", "c:zz = v0",
                                 "U(v0) U(v1)"])
def test_parser_errors(bad):
    with pytest.raises((ParseError, KeyError, FormulaError)):
        parse_formula(bad)


@given(formulas())
def test_free_variables_are_variables(phi):
    assert qrank(phi) >= 0
    assert fv(phi) <= {i for i in range(3)}


def test_rank_zero_atoms():
    L = Language.of(predicates=("R",))
    gens = [p for p, _ in formula_basis(L, 0, 1)[0]]
    assert set(gens) == {Eq(Var(0), Var(0)), RAtom(Var(0), Var(0))}


def test_no_closed_atoms_without_constants():
    assert formula_basis(L0, 0, 0) == [[]]


def test_rank_one_enumeration_is_finite():
    L = Language.of(predicates=("U",))
    out = list(enum_formulas(L, 1, 1))
    assert 0 < len(out) < 100
    assert all(qrank(p) <= 1 for p in out)


def test_enumeration_guard():
    with pytest.raises(GuardExceeded):
        list(enum_formulas(L0, 2, 2, guard=20))
