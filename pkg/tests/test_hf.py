import itertools

import pytest
from hypothesis import given, strategies as st

from conftest import hsets, naturals
from vplab.errors import ParseError
from vplab.hf import (EMPTY, Atom, HSet, as_nat, canon, cart, first, format_hset, hset,
                      is_nat, is_ord, is_transitive, kpair, nat, parse_hset, second, successor,
                      tup, tuple_space, union, unpair, untup, decode_tuple)


def test_interning_gives_identity():
    a = canon([EMPTY, canon([EMPTY])])
    b = hset(hset(EMPTY), EMPTY)
    assert a is b
    assert hset(EMPTY, EMPTY) is hset(EMPTY)


@given(hsets())
def test_canon_is_a_fixpoint(x):
    assert canon(x) is x
    assert canon(iter(x)) is x


def test_atoms_are_not_sets():
    p = Atom("p")
    assert p is Atom("p")
    assert p != EMPTY
    assert not isinstance(p, HSet)
    with pytest.raises(TypeError):
        union(p)


def test_naturals_small():
    assert nat(0) is EMPTY
    assert nat(1) is hset(EMPTY)
    assert nat(3) is hset(nat(0), nat(1), nat(2))
    assert as_nat(nat(5)) == 5
    assert as_nat(hset(nat(1))) is None


@given(hsets(), hsets(), hsets(), hsets())
def test_kpair_injective(x, y, u, v):
    if kpair(x, y) is kpair(u, v):
        assert x is u and y is v
    assert unpair(kpair(x, y)) == (x, y)
    assert first(kpair(x, y)) is x and second(kpair(x, y)) is y


def test_unpair_rejects_non_pairs():
    assert unpair(nat(3)) is None
    assert unpair(Atom("p")) is None
    assert unpair(hset(hset(nat(1), nat(2)))) is None
    assert unpair(kpair(nat(1), nat(1))) == (nat(1), nat(1))


@given(st.lists(hsets(max_leaves=4), min_size=1, max_size=4))
def test_tuple_round_trip(xs):
    assert untup(tup(*xs), len(xs)) == xs


def test_cart_counts():
    M, N = nat(3), nat(2)
    assert len(cart(M, N)) == 6
    assert all(unpair(p)[0] in M and unpair(p)[1] in N for p in cart(M, N))


def test_tuple_space_examples():
    a = nat(4)
    sp = tuple_space(1, hset(a))
    assert len(sp) == 1
    (h,) = sp
    assert sp.read(h, 0) is a
    assert len(tuple_space(2, nat(2))) == 4


def test_zero_tuple_space():
    sp = tuple_space(0, nat(3))
    assert list(sp) == [EMPTY]


@given(st.integers(0, 3), st.integers(0, 3))
def test_tuple_space_shape(n, size):
    M = nat(size)
    sp = tuple_space(n, M)
    assert len(sp) == size ** n
    for h in sp:
        coords = decode_tuple(h, n)
        assert coords is not None and all(c in M for c in coords)


@given(st.integers(1, 3), st.data())
def test_replace_then_read(n, data):
    M = nat(3)
    sp = tuple_space(n, M)
    h = data.draw(st.sampled_from(sp.elements))
    i = data.draw(st.integers(0, n - 1))
    x = data.draw(st.sampled_from(M.elements))
    h2 = sp.replace(h, i, x)
    assert sp.read(h2, i) is x
    for j in range(n):
        if j != i:
            assert sp.read(h2, j) is sp.read(h, j)


def test_read_out_of_range():
    sp = tuple_space(2, nat(2))
    with pytest.raises(IndexError):
        sp.read(sp.elements[0], 2)


# natural-number facts, exhaustively

def test_membership_is_proper_initial_segment():
    for x, y in itertools.product(range(9), repeat=2):
        if nat(x) in nat(y):
            X, Y = nat(x), nat(y)
            assert X < Y
            # every element of Y below something in X is already in X
            assert all(z in X for z in Y for w in X if z in w)


def _injection_exists(src, dst):
    src, dst = list(src), list(dst)
    return any(len(set(img)) == len(src) for img in itertools.permutations(dst, len(src))) \
        if len(src) <= len(dst) else False


def test_no_injection_into_proper_subset():
    for x in range(7):
        for y in range(x + 1, 7):
            assert nat(x) < nat(y)
            assert not _injection_exists(nat(y), nat(x))


def test_trichotomy():
    for x, y in itertools.product(range(9), repeat=2):
        X, Y = nat(x), nat(y)
        assert sum([X in Y, X is Y, Y in X]) == 1


def test_successor_has_greatest_element():
    for n in range(1, 9):
        y = nat(n - 1)
        x = successor(y)
        assert x is nat(n)
        assert all(z in y or z is y for z in x)


@given(naturals())
def test_naturals_are_ordinals(x):
    assert is_transitive(x) and is_ord(x) and is_nat(x)


def test_non_naturals():
    assert not is_nat(hset(nat(1)))
    assert not is_ord(hset(nat(0), nat(2)))


# literal syntax

@given(hsets(atoms=True))
def test_literal_round_trip(x):
    assert parse_hset(format_hset(x)) is x


def test_literal_sugar():
    assert parse_hset("n:3") is nat(3)
    assert parse_hset("{ {}, {{}} }") is nat(2)
    assert parse_hset("{#p, n:0}") is hset(Atom("p"), EMPTY)
    assert format_hset(nat(2)) == "n:2"


@pytest.mark.parametrize("bad", ["", "{", "{}}", "{,}", "n:", "{} {}"])
def test_literal_errors(bad):
    with pytest.raises(ParseError):
        parse_hset(bad)
