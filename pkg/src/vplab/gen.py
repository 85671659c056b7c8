"""Random and exhaustive generators of structures and formulas."""
from __future__ import annotations

import itertools
import random
from typing import Sequence

from .hf import Atom, nat
from .sat import Structure
from .syntax import And, Const, Eq, Exists, Formula, Language, Not, RAtom, UAtom, Var


def random_structure(rng: random.Random, max_size: int = 4, constants: Sequence = (),
                     injective: bool = True, predicates=("U", "R"), min_size: int = 1) -> Structure:
    """Domain {0..n-1}; constants drawn from ``constants`` (an injective I if asked)."""
    n = rng.randint(min_size, max_size)
    if injective:
        n = max(n, len(constants))
    dom = [nat(i) for i in range(n)]
    U = [x for x in dom if rng.random() < 0.5] if "U" in predicates else []
    R = [(x, y) for x in dom for y in dom if rng.random() < 0.4] if "R" in predicates else []
    if injective:
        I = dict(zip(constants, rng.sample(dom, len(constants))))
    else:
        I = {a: rng.choice(dom) for a in constants}
    return Structure.build(dom, U, R, I, predicates=predicates)


def random_formula(rng: random.Random, L: Language, qrank: int = 3, nvars: int = 3,
                   depth: int = 5, allow_const_eq: bool = True) -> Formula:
    """A random formula over L with quantifier rank <= qrank."""
    consts = list(L.constants())

    def term():
        if consts and rng.random() < 0.3:
            return Const(rng.choice(consts))
        return Var(rng.randrange(nvars))

    def atom():
        kinds = ["eq"]
        if "U" in L.predicates:
            kinds.append("U")
        if "R" in L.predicates:
            kinds += ["R", "R"]
        k = rng.choice(kinds)
        if k == "U":
            return UAtom(term())
        if k == "R":
            return RAtom(term(), term())
        t, s = term(), term()
        if not allow_const_eq and isinstance(t, Const) and isinstance(s, Const):
            s = Var(rng.randrange(nvars))
        return Eq(t, s)

    def go(d, q):
        r = rng.random()
        if d == 0 or r < 0.25:
            return atom()
        if r < 0.45:
            return Not(go(d - 1, q))
        if r < 0.7 or q == 0:
            return And(go(d - 1, q), go(d - 1, q))
        return Exists(rng.randrange(nvars), go(d - 1, q - 1))

    return go(depth, qrank)


def random_assignment(rng: random.Random, S: Structure, nvars: int) -> dict:
    return {i: rng.choice(S.elements) for i in range(nvars)}


def _canonical_relation(n: int, edges: frozenset) -> tuple:
    return min(tuple(sorted((p[i], p[j]) for i, j in edges))
               for p in itertools.permutations(range(n)))


def relation_classes(n: int) -> list:
    """One edge set per isomorphism class of binary relations on n points."""
    cells = list(itertools.product(range(n), repeat=2))
    seen = {}
    for bits in range(1 << len(cells)):
        edges = frozenset(c for k, c in enumerate(cells) if bits >> k & 1)
        key = _canonical_relation(n, edges)
        seen.setdefault(key, edges)
    return [seen[k] for k in sorted(seen)]


def relation_structures(max_size: int = 3, min_size: int = 1, up_to_iso: bool = True) -> list:
    """Structures over the language {R} with min_size <= |M| <= max_size."""
    out = []
    for n in range(min_size, max_size + 1):
        dom = [nat(i) for i in range(n)]
        if up_to_iso:
            classes = relation_classes(n)
        else:
            cells = list(itertools.product(range(n), repeat=2))
            classes = [frozenset(c for k, c in enumerate(cells) if bits >> k & 1)
                       for bits in range(1 << len(cells))]
        for edges in classes:
            out.append(Structure.build(dom, R=[(dom[i], dom[j]) for i, j in sorted(edges)],
                                       predicates=("R",),
                                       name=f"n{n}:" + ",".join(f"{i}{j}" for i, j in sorted(edges))))
    return out


def constant_pool(k: int, atoms: bool = False):
    """k constant indices: naturals by default, or atoms #c0.. when asked."""
    if atoms:
        return [Atom(f"c{i}") for i in range(k)]
    return [nat(i) for i in range(k)]
