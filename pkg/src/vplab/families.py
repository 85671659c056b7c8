"""Finite slices of the structure families used to derive set-existence axioms.

Each family is indexed; ``check_vp`` looks for a pair of distinct members with
a morphism of the requested kind between them.  A result of "none" means the
slice behaves like a class with no such pair.
"""
from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import GuardExceeded, StructureError
from .hf import EMPTY, HSet, canon, cart, format_hset, hset, kpair, nat, union
from .morphisms import enumerate_morphisms
from .sat import Structure
from .syntax import Language

DEFAULT_POWERSET_GUARD = 5
MODES = ("embedding", "k-elementary", "isomorphism")


@dataclass(frozen=True)
class Family:
    name: str
    members: tuple  # (index, Structure) pairs
    language: Language
    provenance: str
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        idx = [i for i, _ in self.members]
        if len(set(idx)) != len(idx):
            raise StructureError("family indices must be distinct")
        for i, S in self.members:
            if S.language != self.language:
                raise StructureError(f"member {i} is not over the family's language")

    def __len__(self):
        return len(self.members)

    def structures(self) -> list:
        return [S for _, S in self.members]


def _index_label(i) -> str:
    return format_hset(i) if isinstance(i, HSet) or hasattr(i, "name") else str(i)


def membership_structure(x: HSet, name="") -> Structure:
    """⟨x, ∈ restricted to x⟩ over the language with R only."""
    R = [(a, b) for a in x for b in x if isinstance(b, HSet) and a in b]
    return Structure.build(x, R=R, predicates=("R",), name=name or f"<{format_hset(x)},∈>")


def family_nat(nmax: int) -> Family:
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    members = tuple((n, membership_structure(nat(n), name=f"M_{n}")) for n in range(1, nmax + 1))
    return Family("nat", members, Language.of(predicates=("R",)),
                  "membership orders on naturals (Infinity argument)", {"nmax": nmax})


def family_replacement(A: HSet, F: Mapping) -> Family:
    """M_b = ⟨A×{b}, U_b, I_b⟩ for each b in the range of F."""
    if set(F) != set(A.elements):
        raise ValueError("F must be total on A (and defined only there)")
    members = []
    for b in sorted(set(F.values()), key=lambda v: v.key):
        dom = cart(A, hset(b))
        U = [kpair(a, b) for a in A if F[a] is b]
        I = {a: kpair(a, b) for a in A}
        members.append((b, Structure.build(dom, U=U, I=I, predicates=("U",),
                                           name=f"M_{format_hset(b)}")))
    return Family("replacement", tuple(members), Language(A, frozenset({"U"})),
                  "graph-coded fibers of a function (Replacement argument)",
                  {"A": format_hset(A), "F": {format_hset(a): format_hset(b) for a, b in F.items()}})


def family_powerset(A: HSet, guard: int = DEFAULT_POWERSET_GUARD) -> Family:
    """M_X = ⟨A, X, id_A⟩ for each X ⊆ A."""
    if len(A) > guard:
        raise GuardExceeded("powerset family", guard, f"|A|={len(A)}")
    members = []
    ident = {a: a for a in A}
    for r in range(len(A) + 1):
        for X in itertools.combinations(A.elements, r):
            X = canon(X)
            members.append((X, Structure.build(A, U=X, I=ident, predicates=("U",),
                                               name=f"M_{format_hset(X)}")))
    return Family("powerset", tuple(members), Language(A, frozenset({"U"})),
                  "subsets as unary predicates over named points (Powerset argument)",
                  {"A": format_hset(A)})


def family_copies(S: Structure, count: int = 2) -> Family:
    return Family("copies", tuple((i, S) for i in range(count)), S.language,
                  "repeated structure", {"count": count})


# -- flattening coded structures --------------------------------------------

def unflatten_depth(family: Family, targets=None, limit: int = 32) -> Optional[int]:
    """Least n with targets ⊆ ⋃ⁿS, S the set of member codes; None if not by limit.

    targets defaults to the family's indices.
    """
    S = canon(M.code() for _, M in family.members)
    targets = [i for i, _ in family.members] if targets is None else list(targets)
    level = S
    for n in range(limit + 1):
        if all(t in level for t in targets):
            return n
        level = union(level)
        if level is EMPTY:
            return None
    return None


# -- searching a family for an embedded pair --------------------------------

@dataclass
class VpReport:
    family: str
    provenance: str
    mode: str
    k: Optional[int]
    members: int
    pairs_checked: int
    witnesses: list
    wall_time: float
    params: dict

    @property
    def found(self) -> bool:
        return bool(self.witnesses)

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "provenance": self.provenance,
            "params": self.params,
            "mode": self.mode,
            "k": self.k,
            "bound": f"finite slice with {self.members} members",
            "members": self.members,
            "pairs_checked": self.pairs_checked,
            "witnesses": self.witnesses if self.witnesses else "none",
            "wall_time": self.wall_time,
        }


def check_vp(family: Family, mode: str = "embedding", k: Optional[int] = None,
             workers: int = 1, limit_per_pair: Optional[int] = None) -> VpReport:
    """Scan every ordered pair of distinct members for a morphism of the given kind."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; choose from {MODES}")
    if mode == "k-elementary" and k is None:
        k = max(len(S.elements) for _, S in family.members) + 1
    kind_k = k if mode == "k-elementary" else None
    start = time.perf_counter()
    members = list(family.members)
    pairs = [(p, q) for p in range(len(members)) for q in range(len(members)) if p != q]

    def work(pq):
        p, q = pq
        found = enumerate_morphisms(mode, members[p][1], members[q][1], kind_k, limit=limit_per_pair)
        return pq, found

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, pairs))
    else:
        results = [work(pq) for pq in pairs]
    results.sort(key=lambda r: r[0])
    witnesses = []
    for (p, q), found in results:
        if found:
            i, j = members[p][0], members[q][0]
            witnesses.append({
                "src": _index_label(i),
                "dst": _index_label(j),
                "count": len(found),
                "morphisms": [m.row(_index_label(i), _index_label(j)) for m in found],
            })
    return VpReport(family.name, family.provenance, mode, kind_k, len(members), len(pairs),
                    witnesses, time.perf_counter() - start, dict(family.params))
