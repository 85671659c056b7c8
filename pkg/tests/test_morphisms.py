import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from vplab.errors import GuardExceeded, StructureError
from vplab.gen import random_structure
from vplab.hf import nat
from vplab.morphisms import (chain_structure, compose, ef_game, enumerate_morphisms, find_rigid,
                             is_embedding, is_hom, is_k_elementary, is_rigid, verify)
from vplab.sat import Structure

C1 = [nat(0)]


def structures(consts=C1, max_size=3, injective=True):
    return st.integers(0, 2 ** 32).map(
        lambda seed: random_structure(random.Random(seed), max_size, consts, injective))


def brute(S, T, strong, injective):
    """All maps S -> T by direct enumeration over the product of domains."""
    out = []
    for img in itertools.product(T.elements, repeat=len(S.elements)):
        f = dict(zip(S.elements, img))
        if injective and len(set(img)) < len(img):
            continue
        if any(f[x] is not y for x, y in ((S.interp[a], T.interp[a]) for a in S.interp)):
            continue
        ok = True
        for x in S.elements:
            if (x in S.uset) != (f[x] in T.uset) and (strong or x in S.uset):
                ok = False
        for x, y in itertools.product(S.elements, repeat=2):
            a, b = (x, y) in S.rpairs, (f[x], f[y]) in T.rpairs
            if (a and not b) or (strong and b and not a):
                ok = False
        if ok:
            out.append(tuple(img))
    return out


@settings(max_examples=60)
@given(structures(), structures())
def test_enumeration_matches_brute_force(S, T):
    for kind, strong in (("hom", False), ("embedding", True)):
        got = [tuple(y for _, y in m.pairs) for m in enumerate_morphisms(kind, S, T)]
        assert got == brute(S, T, strong, strong)


@settings(max_examples=60)
@given(structures(), structures())
def test_every_morphism_verifies_and_pins_constants(S, T):
    for kind in ("hom", "embedding", "isomorphism"):
        for m in enumerate_morphisms(kind, S, T):
            assert verify(kind, S, T, m.map)
            assert all(m(S.interp[a]) is T.interp[a] for a in S.interp)
            if kind != "hom":
                assert len(set(m.map.values())) == len(m.map)


@settings(max_examples=30)
@given(structures(max_size=4), structures(max_size=4))
def test_finite_elementarity_collapses_to_isomorphism(S, T):
    k = len(T.elements) + 1
    elem = enumerate_morphisms("k-elementary", S, T, k, limit=1)
    iso = enumerate_morphisms("isomorphism", S, T, limit=1)
    assert bool(elem) == bool(iso)


@settings(max_examples=40)
@given(structures(), structures(), structures())
def test_composition_of_embeddings(A, B, C):
    for f in enumerate_morphisms("embedding", A, B, limit=3):
        for g in enumerate_morphisms("embedding", B, C, limit=3):
            assert is_embedding(A, C, compose(f.map, g.map))


def test_embedding_but_not_elementary():
    S, T = chain_structure(2), chain_structure(3)
    assert enumerate_morphisms("embedding", S, T)
    assert not enumerate_morphisms("k-elementary", S, T, 2)


def test_ef_examples():
    S, T = chain_structure(2), chain_structure(3)
    assert not ef_game(S, T, 2)
    assert ef_game(S, T, 1)
    assert ef_game(S, T, 0, start={nat(0): nat(0)})
    for k in range(4):
        assert ef_game(T, T, k, start={x: x for x in T.elements})


def test_ef_respects_constants():
    S = Structure.build([nat(0), nat(1)], U=[nat(0)], I={nat(0): nat(0)})
    T = Structure.build([nat(0), nat(1)], U=[nat(0)], I={nat(0): nat(1)})
    assert not ef_game(S, T, 0)


def test_hom_is_preserve_only():
    S = Structure.build([nat(0)], predicates=("R",))
    T = Structure.build([nat(0)], R=[(nat(0), nat(0))], predicates=("R",))
    f = {nat(0): nat(0)}
    assert is_hom(S, T, f)
    assert not is_embedding(S, T, f)


def test_rigidity():
    for n in range(1, 6):
        assert is_rigid(find_rigid(n))
    assert is_rigid(find_rigid(3, "search"))
    edgeless = Structure.build([nat(0), nat(1)], predicates=("R",))
    assert not is_rigid(edgeless)
    with pytest.raises(GuardExceeded):
        find_rigid(9, "search", guard=5)


def test_argument_errors():
    S = chain_structure(2)
    with pytest.raises(ValueError):
        enumerate_morphisms("nope", S, S)
    with pytest.raises(ValueError):
        enumerate_morphisms("k-elementary", S, S)
    with pytest.raises(StructureError):
        enumerate_morphisms("endo", S, chain_structure(3))
    with pytest.raises(StructureError):
        enumerate_morphisms("hom", S, Structure.build([nat(0)], U=[nat(0)], predicates=("U",)))
    assert is_k_elementary(S, S, {x: x for x in S.elements}, 3)


def test_row_shape():
    S = chain_structure(2)
    (m,) = enumerate_morphisms("isomorphism", S, S)
    row = m.row("a", "b")
    assert row == {"kind": "isomorphism", "src": "a", "dst": "b",
                   "map": [["{}", "{}"], ["n:1", "n:1"]], "verified": True}
