"""Maps between finite structures: enumeration, verification, rigidity, EF games.

Everything runs on small integer views of the structures (elements indexed in
canonical order), so enumeration order is lexicographic on the map read as a
sequence over the source's elements.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Optional

from .errors import GuardExceeded, StructureError
from .hf import format_hset, nat
from .sat import Structure

KINDS = ("hom", "endo", "embedding", "isomorphism", "k-elementary")
DEFAULT_RIGID_SEARCH_GUARD = 5
DEFAULT_K_GUARD = 8


class _View:
    __slots__ = ("S", "elems", "index", "U", "R", "consts", "n")

    def __init__(self, S: Structure):
        self.S = S
        self.elems = S.elements
        self.index = {x: i for i, x in enumerate(self.elems)}
        self.n = len(self.elems)
        self.U = frozenset(self.index[x] for x in S.uset)
        self.R = frozenset((self.index[x], self.index[y]) for x, y in S.rpairs)
        self.consts = {a: self.index[x] for a, x in S.I}


def _views(S: Structure, T: Structure):
    if S.pool is not T.pool or S.predicates != T.predicates:
        raise StructureError(f"language mismatch between {S.label()} and {T.label()}")
    return _View(S), _View(T)


@dataclass(frozen=True)
class Morphism:
    src: Structure
    dst: Structure
    pairs: tuple
    kind: str
    k: Optional[int] = None

    @cached_property
    def map(self) -> dict:
        return dict(self.pairs)

    def __call__(self, x):
        return self.map[x]

    def row(self, src_id=None, dst_id=None) -> dict:
        return {
            "kind": self.kind if self.k is None else f"{self.kind}({self.k})",
            "src": src_id if src_id is not None else self.src.label(),
            "dst": dst_id if dst_id is not None else self.dst.label(),
            "map": [[format_hset(x), format_hset(y)] for x, y in self.pairs],
            "verified": verify(self.kind, self.src, self.dst, self.map, self.k),
        }


def _pins(s: _View, t: _View) -> Optional[dict]:
    """Forced values from constant pinning f(I(a)) = J(a); None if inconsistent."""
    pins = {}
    for a, i in s.consts.items():
        j = t.consts[a]
        if pins.setdefault(i, j) != j:
            return None
    return pins


def _search(s: _View, t: _View, strong: bool, injective: bool, limit=None):
    """Backtracking over the source elements in order; yields maps as int tuples."""
    pins = _pins(s, t)
    if pins is None:
        return
    if injective and s.n > t.n:
        return
    assign = [None] * s.n
    used = set()
    found = 0

    def ok(i, j):
        if injective and j in used:
            return False
        if i in s.U and j not in t.U:
            return False
        if strong and j in t.U and i not in s.U:
            return False
        for i2 in range(i + 1):
            j2 = j if i2 == i else assign[i2]
            for a, b, fa, fb in ((i, i2, j, j2), (i2, i, j2, j)):
                src_edge = (a, b) in s.R
                dst_edge = (fa, fb) in t.R
                if src_edge and not dst_edge:
                    return False
                if strong and dst_edge and not src_edge:
                    return False
        return True

    def go(i):
        nonlocal found
        if i == s.n:
            found += 1
            yield tuple(assign)
            return
        cands = (pins[i],) if i in pins else range(t.n)
        for j in cands:
            if ok(i, j):
                assign[i] = j
                used.add(j)
                yield from go(i + 1)
                used.discard(j)
                assign[i] = None
                if limit is not None and found >= limit:
                    return

    yield from go(0)


def enumerate_morphisms(kind: str, src: Structure, dst: Structure, k: Optional[int] = None,
                        limit: Optional[int] = None, k_guard: int = DEFAULT_K_GUARD) -> list:
    """Every morphism of the given kind, in lexicographic order."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; choose from {KINDS}")
    if (kind == "k-elementary") != (k is not None):
        raise ValueError("k is required exactly when kind is 'k-elementary'")
    if kind == "k-elementary" and k > k_guard:
        raise GuardExceeded("k-elementary rank", k_guard, f"k={k}")
    if kind == "endo" and src != dst:
        raise StructureError("endomorphisms need src == dst")
    s, t = _views(src, dst)
    strong = kind in ("embedding", "isomorphism", "k-elementary")
    if kind == "isomorphism" and s.n != t.n:
        return []
    out = []
    search_limit = limit if kind in ("hom", "endo", "embedding", "isomorphism") else None
    for m in _search(s, t, strong, strong, search_limit):
        if kind == "k-elementary" and not _ef(s, t, k, tuple(enumerate(m))):
            continue
        out.append(Morphism(src, dst, tuple((s.elems[i], t.elems[j]) for i, j in enumerate(m)),
                            kind, k))
        if limit is not None and len(out) >= limit:
            break
    return out


# -- standalone verifiers ---------------------------------------------------

def _as_int_map(s: _View, t: _View, f: Mapping) -> Optional[list]:
    try:
        if set(f) != set(s.elems):
            return None
        return [t.index[f[x]] for x in s.elems]
    except KeyError:
        return None


def _check_map(s, t, m, strong, injective) -> bool:
    if m is None:
        return False
    pins = _pins(s, t)
    if pins is None or any(m[i] != j for i, j in pins.items()):
        return False
    if injective and len(set(m)) != len(m):
        return False
    for i in range(s.n):
        if strong and (i in s.U) != (m[i] in t.U):
            return False
        if not strong and i in s.U and m[i] not in t.U:
            return False
    for a in range(s.n):
        for b in range(s.n):
            e, fe = (a, b) in s.R, (m[a], m[b]) in t.R
            if e and not fe:
                return False
            if strong and fe and not e:
                return False
    return True


def is_hom(S, T, f) -> bool:
    s, t = _views(S, T)
    return _check_map(s, t, _as_int_map(s, t, f), False, False)


def is_embedding(S, T, f) -> bool:
    s, t = _views(S, T)
    return _check_map(s, t, _as_int_map(s, t, f), True, True)


def is_isomorphism(S, T, f) -> bool:
    return len(S.elements) == len(T.elements) and is_embedding(S, T, f)


def is_k_elementary(S, T, f, k: int) -> bool:
    s, t = _views(S, T)
    m = _as_int_map(s, t, f)
    if not _check_map(s, t, m, True, True):
        return False
    return _ef(s, t, k, tuple(enumerate(m)))


def verify(kind, S, T, f, k=None) -> bool:
    if kind == "hom":
        return is_hom(S, T, f)
    if kind == "endo":
        return S == T and is_hom(S, T, f)
    if kind == "embedding":
        return is_embedding(S, T, f)
    if kind == "isomorphism":
        return is_isomorphism(S, T, f)
    if kind == "k-elementary":
        return is_k_elementary(S, T, f, k)
    raise ValueError(f"unknown kind {kind!r}")


def compose(f: Mapping, g: Mapping) -> dict:
    """g after f."""
    return {x: g[y] for x, y in f.items()}


# -- rigidity ---------------------------------------------------------------

def is_rigid(S: Structure) -> bool:
    endos = enumerate_morphisms("endo", S, S, limit=2)
    return len(endos) == 1 and all(x is y for x, y in endos[0].pairs)


def chain_structure(n: int) -> Structure:
    dom = [nat(i) for i in range(n)]
    R = [(nat(i), nat(j)) for i in range(n) for j in range(i + 1, n)]
    return Structure.build(dom, R=R, predicates=("R",), name=f"chain{n}")


def find_rigid(n: int, mode: str = "construct", guard: int = DEFAULT_RIGID_SEARCH_GUARD):
    """A rigid binary relation on n = {0..n-1}, returned as a Structure."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if mode == "construct":
        S = chain_structure(n)
        if not is_rigid(S):
            raise AssertionError("strict chain failed the rigidity check")
        return S
    if mode != "search":
        raise ValueError("mode must be 'construct' or 'search'")
    if n > guard:
        raise GuardExceeded("rigid-relation search", guard, f"n={n}")
    dom = [nat(i) for i in range(n)]
    cells = list(itertools.product(range(n), repeat=2))
    tried = 0
    for e in range(len(cells) + 1):
        for edges in itertools.combinations(cells, e):
            tried += 1
            S = Structure.build(dom, R=[(nat(i), nat(j)) for i, j in edges],
                                predicates=("R",), name=f"rigid{n}")
            if is_rigid(S):
                return S
    raise AssertionError(f"no rigid relation on {n} points after {tried} candidates")


# -- Ehrenfeucht-Fraisse game -----------------------------------------------

def _extends(s: _View, t: _View, pos: dict, inv: dict, a: int, b: int) -> bool:
    """Is pos + (a,b) still a partial isomorphism?  pos must already be one."""
    if a in pos:
        return pos[a] == b
    if b in inv:
        return False
    if (a in s.U) != (b in t.U):
        return False
    if ((a, a) in s.R) != ((b, b) in t.R):
        return False
    for a2, b2 in pos.items():
        if ((a, a2) in s.R) != ((b, b2) in t.R):
            return False
        if ((a2, a) in s.R) != ((b2, b) in t.R):
            return False
    return True


def _start_position(s: _View, t: _View, start):
    pos, inv = {}, {}
    pairs = [(s.consts[a], t.consts[a]) for a in s.consts] + list(start)
    for a, b in pairs:
        if not _extends(s, t, pos, inv, a, b):
            return None
        pos[a] = b
        inv[b] = a
    return pos


def _ef(s: _View, t: _View, k: int, start) -> bool:
    pos = _start_position(s, t, start)
    if pos is None:
        return False
    memo = {}

    def win(pos, k):
        if k == 0:
            return True
        key = (frozenset(pos.items()), k)
        hit = memo.get(key)
        if hit is not None:
            return hit
        inv = {b: a for a, b in pos.items()}
        result = True
        for a in range(s.n):
            if a in pos:
                continue
            if not any(_extends(s, t, pos, inv, a, b) and win({**pos, a: b}, k - 1)
                       for b in range(t.n)):
                result = False
                break
        if result:
            for b in range(t.n):
                if b in inv:
                    continue
                if not any(_extends(s, t, pos, inv, a, b) and win({**pos, a: b}, k - 1)
                           for a in range(s.n)):
                    result = False
                    break
        memo[key] = result
        return result

    return win(pos, k)


def ef_game(S: Structure, T: Structure, k: int, start=()) -> bool:
    """Duplicator wins the k-round game from start (pairs or a mapping)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    s, t = _views(S, T)
    if isinstance(start, Mapping):
        start = start.items()
    try:
        pairs = [(s.index[x], t.index[y]) for x, y in start]
    except KeyError as exc:
        raise StructureError(f"start position mentions {exc.args[0]}, outside the domains") from None
    return _ef(s, t, k, pairs)


def report_rows(morphisms, src_id=None, dst_id=None) -> list:
    return [m.row(src_id, dst_id) for m in morphisms]
