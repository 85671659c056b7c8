import random
import sys

import pytest
from hypothesis import settings, strategies as st

from vplab.hf import Atom, canon, nat

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def hsets(max_leaves=8, atoms=False):
    base = st.just(canon())
    if atoms:
        base = base | st.sampled_from([Atom("p"), Atom("q")])
    return st.recursive(
        base,
        lambda kids: st.lists(kids, max_size=3).map(canon),
        max_leaves=max_leaves,
    )


def naturals(hi=8):
    return st.integers(0, hi).map(nat)


@pytest.fixture
def rng():
    return random.Random(1234)


from vplab.syntax import And, Const, Eq, Exists, Not, RAtom, UAtom, Var  # noqa: E402


def terms(nvars=3, consts=()):
    ts = st.integers(0, nvars - 1).map(Var)
    if consts:
        ts = ts | st.sampled_from([Const(c) for c in consts])
    return ts


def formulas(nvars=3, consts=(), max_leaves=6):
    t = terms(nvars, consts)
    atoms = st.one_of(
        st.builds(Eq, t, t),
        st.builds(UAtom, t),
        st.builds(RAtom, t, t),
    )
    return st.recursive(
        atoms,
        lambda kids: st.one_of(
            st.builds(Not, kids),
            st.builds(And, kids, kids),
            st.builds(Exists, st.integers(0, nvars - 1), kids),
        ),
        max_leaves=max_leaves,
    )


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for r in sorted(results, key=lambda r: r.number):
        terminalreporter.write_line(r.line())
