import itertools

import pytest
from hypothesis import given, settings, strategies as st

from vplab.errors import GuardExceeded, StructureError
from vplab.families import (Family, check_vp, family_copies, family_nat, family_powerset,
                            family_replacement, membership_structure, unflatten_depth)
from vplab.hf import nat
from vplab.morphisms import chain_structure, enumerate_morphisms
from vplab.sat import Structure


def test_nat_family_has_no_isomorphism_or_elementary_pair():
    fam = family_nat(5)
    assert not check_vp(fam, "isomorphism").found
    rep = check_vp(fam, "k-elementary", 6)
    assert not rep.found and rep.k == 6
    assert check_vp(fam, "k-elementary").k == 6


def test_nat_family_embeds_upwards():
    fam = family_nat(7)
    rep = check_vp(fam, "embedding")
    pairs = {(w["src"], w["dst"]) for w in rep.witnesses}
    assert pairs == {(str(x), str(y)) for x in range(1, 8) for y in range(x + 1, 8)}


def test_infinity_instance_exhaustive():
    for x in range(1, 8):
        for y in range(x + 1, 8):
            S, T = membership_structure(nat(x)), membership_structure(nat(y))
            assert not enumerate_morphisms("isomorphism", S, T)
            assert not enumerate_morphisms("k-elementary", S, T, y + 1, limit=1)
            assert enumerate_morphisms("embedding", S, T, limit=1)


def test_copies_give_identity_witness():
    rep = check_vp(family_copies(chain_structure(3)), "embedding")
    assert rep.found
    maps = rep.witnesses[0]["morphisms"]
    assert len(maps) == 1 and all(a == b for a, b in maps[0]["map"])


def _all_maps(A, codomain):
    for img in itertools.product(codomain, repeat=len(A)):
        yield dict(zip(A.elements, img))


def test_replacement_instances():
    cod = [nat(5), nat(6), nat(7)]
    for n in range(1, 4):
        A = nat(n)
        for F in _all_maps(A, cod):
            rep = check_vp(family_replacement(A, F), "embedding")
            assert not rep.found


def test_powerset_instances():
    for n in range(0, 4):
        fam = family_powerset(nat(n))
        assert len(fam) == 2 ** n
        for (X, S), (Y, T) in itertools.product(fam.members, repeat=2):
            ms = enumerate_morphisms("embedding", S, T)
            if X is Y:
                assert len(ms) == 1 and all(a is b for a, b in ms[0].pairs)
            else:
                assert not ms


@settings(max_examples=20)
@given(st.integers(1, 5), st.sampled_from(["embedding", "isomorphism"]))
def test_every_ordered_pair_checked_once(nmax, mode):
    rep = check_vp(family_nat(nmax), mode)
    assert rep.pairs_checked == nmax * (nmax - 1)


def test_worker_count_does_not_change_report():
    fam = family_nat(5)
    a = check_vp(fam, "embedding", workers=1).as_dict()
    b = check_vp(fam, "embedding", workers=4).as_dict()
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


def test_unflatten_depth():
    fam = family_replacement(nat(2), {nat(0): nat(5), nat(1): nat(6)})
    depth = unflatten_depth(fam)
    assert depth is not None and depth > 0
    assert unflatten_depth(fam, targets=[nat(40)], limit=10) is None


def test_family_validation():
    S = chain_structure(2)
    with pytest.raises(StructureError):
        Family("bad", ((0, S), (0, S)), S.language, "")
    with pytest.raises(StructureError):
        other = Structure.build([nat(0)], U=[nat(0)], predicates=("U",))
        Family("bad", ((0, S), (1, other)), S.language, "")
    with pytest.raises(ValueError):
        family_replacement(nat(2), {nat(0): nat(1)})
    with pytest.raises(GuardExceeded):
        family_powerset(nat(6))
    with pytest.raises(ValueError):
        check_vp(family_nat(2), "hom")
