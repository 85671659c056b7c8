import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from vplab.errors import GuardExceeded, ParseError, StructureError
from vplab.fm import (FmSpec, all_partial_orders, apply_perm, bare_structure,
                      brute_force_symmetric, build_model, comp_report, is_supported_by,
                      map_as_set, minimal_support_size, parse_spec, poset_realization,
                      symmetric_injection_exists, vp_comp_demo)
from vplab.hf import nat

IDX = ("i", "j", "k")


def model_for(order, N=3, s=1, indices=IDX):
    return build_model(FmSpec(indices, order, N, s))


def subsets(indices, hi=2):
    return [frozenset(c) for r in range(1, hi + 1) for c in itertools.combinations(indices, r)]


def test_there_are_19_orders_on_three_points():
    assert len(all_partial_orders(IDX)) == 19


@pytest.mark.parametrize("order", all_partial_orders(IDX))
def test_injection_iff_subset(order):
    model = model_for(order)
    for x, y in itertools.product(subsets(IDX), repeat=2):
        w = symmetric_injection_exists(x, y, model)
        assert (w is not None) == (x <= y)
        if w is not None:
            assert w.checked and len(w.support) <= model.s


@pytest.mark.parametrize("order", all_partial_orders(IDX)[:6])
def test_down_set_realization(order):
    assert poset_realization(model_for(order))["agrees"]


def test_against_brute_force_oracle():
    model = build_model(FmSpec.from_pairs(("i", "j"), [], 3, 1))
    for x, y in itertools.product(subsets(("i", "j")), repeat=2):
        if len(x) <= len(y):
            assert brute_force_symmetric(x, y, model) == (symmetric_injection_exists(x, y, model)
                                                          is not None)


def test_distinct_fibers_need_large_support():
    N = 3
    model = build_model(FmSpec.from_pairs(("i", "j"), [], N, 1))
    size = minimal_support_size({"i"}, {"j"}, model)
    assert size is not None and size >= N


def _fiber_perm(model, rng):
    perm = {}
    for i, fib in model.fibers.items():
        img = list(fib)
        rng.shuffle(img)
        perm.update(zip(fib, img))
    return perm


@settings(max_examples=50)
@given(st.integers(0, 2 ** 32))
def test_support_monotone_and_equivariant(seed):
    rng = random.Random(seed)
    model = build_model(FmSpec.from_pairs(("i", "j"), [("i", "j")], 3, 2))
    x = frozenset({"i"})
    y = frozenset(rng.choice([{"i"}, {"i", "j"}]))
    w = symmetric_injection_exists(x, y, model)
    assert w is not None
    h = map_as_set(w.injection)
    E = set(w.support)
    assert is_supported_by(h, E, model)
    bigger = E | set(rng.sample(model.atoms, 2))
    assert is_supported_by(h, bigger, model)
    pi = _fiber_perm(model, rng)
    assert is_supported_by(apply_perm(pi, h), {pi[a] for a in E}, model)


def test_orbit_sets_are_invariant():
    model = model_for(all_partial_orders(IDX)[0])
    assert is_supported_by(model.orbit_set({"i"}), (), model)
    assert not is_supported_by(model.atoms[0], (), model)
    assert is_supported_by(model.atoms[0], (model.atoms[0],), model)


def test_comp_reports():
    model = build_model(FmSpec.from_pairs(("i", "j"), [("i", "j")], 3, 2))
    rep = comp_report(model, family=[{"i"}, {"i", "j"}])
    assert rep["comp_holds"] and rep["N"] == 3 and rep["s"] == 2
    rep = comp_report(model, kappa=2)
    assert not rep["comp_holds"]
    assert ["S_{i}", "S_{j}"] in rep["counterexamples"]
    with pytest.raises(ValueError):
        comp_report(model)


def test_bare_set_demo():
    assert vp_comp_demo([bare_structure([nat(0)]), bare_structure([nat(0), nat(1)])])["src"] == 0
    two = vp_comp_demo([bare_structure([nat(0), nat(1)]), bare_structure([nat(2), nat(3)])])
    assert two["reason"].startswith("equal sizes")
    assert vp_comp_demo([bare_structure([nat(0)])]) is None


def test_spec_validation():
    with pytest.raises(ValueError):
        FmSpec(("i",), {("i", "i")}, 2, 2)
    with pytest.raises(ValueError):
        FmSpec(("i", "j"), {("i", "i"), ("j", "j"), ("i", "j"), ("j", "i")}, 3, 1)
    with pytest.raises(ValueError):
        FmSpec(("i",), set(), 3, 1)
    with pytest.raises(GuardExceeded):
        build_model(FmSpec.from_pairs(("i", "j"), [], 40, 1))
    with pytest.raises(StructureError):
        symmetric_injection_exists({"q"}, {"i"}, model_for(all_partial_orders(IDX)[0]))


def test_spec_file():
    spec = parse_spec("indices: i, j, k\norder: i<=j, j<=k  % a chain\nN: 3\ns: 1\n")
    assert spec.leq("i", "k") and spec.down("k") == frozenset(IDX)
    with pytest.raises(ParseError):
        parse_spec("indices: i\nN: 3")
    with pytest.raises(ParseError):
        parse_spec("indices: i, j\norder: i<j\nN: 3\ns: 1")
    with pytest.raises(ParseError):
        parse_spec("indices: i\nN: 2\ns: 2")
