"""Truncated permutation models: finite atom fibers, fiber-preserving groups,
and supports of bounded size.

With N atoms per index and supports of size at most s < N, an object is
symmetric when some atom set E with |E| <= s has every fiber-preserving
permutation fixing E pointwise also fixing the object.  The pointwise
stabilizer of E inside the fiber-preserving group is generated by the
transpositions of two atoms that share a fiber and both lie outside E, so it
is enough to test those.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .errors import GuardExceeded, ParseError, StructureError
from .hf import Atom, HSet, canon, kpair
from .morphisms import enumerate_morphisms
from .sat import Structure

DEFAULT_ATOM_GUARD = 64
DEFAULT_SEARCH_GUARD = 5_000_000


@dataclass(frozen=True)
class FmSpec:
    indices: tuple
    order: frozenset  # pairs (i, j) meaning i ⪯ j; reflexive, transitive, antisymmetric
    N: int
    s: int

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(self.indices))
        object.__setattr__(self, "order", frozenset(self.order))
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("index names repeat")
        for i in self.indices:
            if not re.fullmatch(r"[A-Za-z0-9]+", str(i)):
                raise ValueError(f"index name {i!r} must be alphanumeric")
        if not 0 <= self.s < self.N:
            raise ValueError(f"need 0 <= s < N, got N={self.N}, s={self.s}")
        idx = set(self.indices)
        for i, j in self.order:
            if i not in idx or j not in idx:
                raise ValueError(f"order mentions unknown index in ({i}, {j})")
        if any((i, i) not in self.order for i in idx):
            raise ValueError("order is not reflexive")
        for (i, j), (k, l) in itertools.product(self.order, repeat=2):
            if j == k and (i, l) not in self.order:
                raise ValueError(f"order is not transitive: ({i},{j}), ({j},{l})")
            if i == l and j == k and i != j:
                raise ValueError(f"order is not antisymmetric at ({i}, {j})")

    @classmethod
    def from_pairs(cls, indices, pairs, N, s) -> "FmSpec":
        """Reflexive-transitive closure of the given pairs."""
        order = {(i, i) for i in indices} | set(pairs)
        changed = True
        while changed:
            changed = False
            for (i, j), (k, l) in list(itertools.product(order, repeat=2)):
                if j == k and (i, l) not in order:
                    order.add((i, l))
                    changed = True
        return cls(tuple(indices), frozenset(order), N, s)

    def leq(self, i, j) -> bool:
        return (i, j) in self.order

    def down(self, i) -> frozenset:
        """î = {j : j ⪯ i}."""
        return frozenset(j for j in self.indices if (j, i) in self.order)

    def as_dict(self) -> dict:
        return {"indices": list(self.indices),
                "order": sorted([i, j] for i, j in self.order if i != j),
                "N": self.N, "s": self.s}


def atom(i, n) -> Atom:
    return Atom(f"a_{i}_{n}")


class FmModel:
    def __init__(self, spec: FmSpec, guard: int = DEFAULT_ATOM_GUARD):
        if len(spec.indices) * spec.N > guard:
            raise GuardExceeded("atom count", guard, len(spec.indices) * spec.N)
        self.spec = spec
        self.fibers = {i: tuple(atom(i, n) for n in range(spec.N)) for i in spec.indices}
        self.atoms = tuple(a for i in spec.indices for a in self.fibers[i])
        self.fiber_of = {a: i for i, f in self.fibers.items() for a in f}
        self.generators = tuple((a, b) for i in spec.indices
                                for a, b in itertools.combinations(self.fibers[i], 2))
        self._apply_memo = {}

    @property
    def N(self):
        return self.spec.N

    @property
    def s(self):
        return self.spec.s

    def fiber_set(self, i) -> HSet:
        return canon(self.fibers[i])

    def orbit_set(self, x) -> HSet:
        """S_x = union of the fibers S_i for i in x."""
        return canon(a for i in sorted(x) for a in self.fibers[i])

    def orbit_atoms(self, x) -> tuple:
        return tuple(a for i in self.spec.indices if i in x for a in self.fibers[i])

    def applicability(self) -> str:
        return (f"truncated at N={self.N} atoms per index with supports of size <= s={self.s}; "
                "conclusions mirror the infinite model only while s < N")


def build_model(spec: FmSpec, guard: int = DEFAULT_ATOM_GUARD) -> FmModel:
    return FmModel(spec, guard)


def apply_perm(perm: dict, x):
    """π·x for an atom permutation given as a dict (unlisted atoms are fixed)."""
    memo = {}

    def go(v):
        if isinstance(v, Atom):
            return perm.get(v, v)
        hit = memo.get(v)
        if hit is None:
            hit = canon(go(e) for e in v)
            memo[v] = hit
        return hit

    return go(x)


def transposition(a, b) -> dict:
    return {a: b, b: a}


def is_supported_by(x, E, model: FmModel) -> bool:
    E = frozenset(E)
    for a, b in model.generators:
        if a in E or b in E:
            continue
        if apply_perm(transposition(a, b), x) is not x:
            return False
    return True


def map_as_set(h: dict) -> HSet:
    return canon(kpair(a, b) for a, b in h.items())


@dataclass
class SymmetricWitness:
    injection: dict
    support: tuple
    checked: bool

    def as_dict(self) -> dict:
        return {
            "injection": [[str(a), str(b)] for a, b in self.injection.items()],
            "support": [str(a) for a in self.support],
            "checked": self.checked,
        }


def _injection_under_support(dom, cod, gens):
    """Lexicographically first injection dom -> cod commuting with every generator.

    Works on integer atom ids; gens are (p, q) transpositions outside the support.
    """
    n = len(dom)
    if n > len(cod):
        return None
    assign = {}
    used = set()

    def tau(g, v):
        p, q = g
        return q if v == p else p if v == q else v

    def consistent(u, w):
        for g in gens:
            tu = tau(g, u)
            if tu == u:
                if tau(g, w) != w:
                    return False
            elif tu in assign and assign[tu] != tau(g, w):
                return False
        return True

    def go(k):
        if k == n:
            return True
        u = dom[k]
        for w in cod:
            if w in used or not consistent(u, w):
                continue
            assign[u] = w
            used.add(w)
            if go(k + 1):
                return True
            del assign[u]
            used.discard(w)
        return False

    return dict(assign) if go(0) else None


@lru_cache(maxsize=None)
def _search_cached(n_idx, N, s, x, y):
    # Atoms are ids idx*N + n; x and y are frozensets of index positions.
    atoms = range(n_idx * N)
    dom = [i * N + n for i in sorted(x) for n in range(N)]
    cod = [i * N + n for i in sorted(y) for n in range(N)]
    all_gens = [(i * N + a, i * N + b) for i in range(n_idx)
                for a, b in itertools.combinations(range(N), 2)]
    for size in range(s + 1):
        for E in itertools.combinations(atoms, size):
            Es = set(E)
            gens = [g for g in all_gens if g[0] not in Es and g[1] not in Es]
            h = _injection_under_support(dom, cod, gens)
            if h is not None:
                return tuple(sorted(h.items())), E
    return None


def symmetric_injection_exists(x, y, model: FmModel) -> Optional[SymmetricWitness]:
    """A symmetric injection S_x -> S_y with support of size <= s, or None.

    Supports are tried by size, then lexicographically; for each the
    lexicographically first admissible injection is returned.  The witness is
    re-verified on the set-level objects.
    """
    idx = {i: k for k, i in enumerate(model.spec.indices)}
    x, y = frozenset(x), frozenset(y)
    for i in x | y:
        if i not in idx:
            raise StructureError(f"unknown index {i!r}")
    n_dom, n_cod = len(x) * model.N, len(y) * model.N
    space = math.perm(n_cod, n_dom) if n_dom <= n_cod else 0
    supports = sum(math.comb(len(model.atoms), r) for r in range(model.s + 1))
    if space * supports > DEFAULT_SEARCH_GUARD and not x <= y:
        raise GuardExceeded("symmetric injection search", DEFAULT_SEARCH_GUARD, space * supports)
    res = _search_cached(len(model.spec.indices), model.N, model.s,
                         frozenset(idx[i] for i in x), frozenset(idx[i] for i in y))
    if res is None:
        return None
    pairs, E = res
    by_id = model.atoms
    h = {by_id[u]: by_id[w] for u, w in pairs}
    support = tuple(by_id[e] for e in E)
    checked = is_supported_by(map_as_set(h), support, model) and len(set(h.values())) == len(h)
    return SymmetricWitness(h, support, checked)


def brute_force_symmetric(x, y, model: FmModel) -> bool:
    """Every injection against every support, checked on sets (slow oracle)."""
    dom, cod = model.orbit_atoms(x), model.orbit_atoms(y)
    supports = [E for r in range(model.s + 1) for E in itertools.combinations(model.atoms, r)]
    for image in itertools.permutations(cod, len(dom)):
        hs = map_as_set(dict(zip(dom, image)))
        if any(is_supported_by(hs, E, model) for E in supports):
            return True
    return False


def minimal_support_size(x, y, model: FmModel, injective_total=True) -> Optional[int]:
    """Least |E| (E any atom set) admitting a symmetric injection S_x -> S_y."""
    dom, cod = model.orbit_atoms(x), model.orbit_atoms(y)
    best = None
    for image in itertools.permutations(cod, len(dom)):
        hs = map_as_set(dict(zip(dom, image)))
        for r in range(len(model.atoms) + 1):
            if best is not None and r >= best:
                break
            if any(is_supported_by(hs, E, model) for E in itertools.combinations(model.atoms, r)):
                best = r
                break
    return best


def sym_comparable(x, y, model: FmModel) -> Optional[dict]:
    """Direction and witness of a symmetric injection either way, or None."""
    w = symmetric_injection_exists(x, y, model)
    if w is not None:
        return {"direction": "x->y", "witness": w}
    w = symmetric_injection_exists(y, x, model)
    if w is not None:
        return {"direction": "y->x", "witness": w}
    return None


def _label(x) -> str:
    return "S_{" + ",".join(sorted(map(str, x))) + "}"


def comp_report(model: FmModel, family=None, kappa: Optional[int] = None) -> dict:
    """Comparability of orbit sets in the truncated model.

    With ``family`` (a list of index sets) decide whether some two members are
    symmetrically comparable.  With ``kappa`` check every family of kappa
    distinct nonempty orbit sets.
    """
    if (family is None) == (kappa is None):
        raise ValueError("give exactly one of family or kappa")
    base = {"N": model.N, "s": model.s, "applicability": model.applicability(),
            "spec": model.spec.as_dict()}
    if family is not None:
        return {**base, "kind": "comp_family", **_family_comp(model, [frozenset(x) for x in family])}
    subsets = [frozenset(c) for r in range(1, len(model.spec.indices) + 1)
               for c in itertools.combinations(model.spec.indices, r)]
    failures, checked = [], 0
    for fam in itertools.combinations(subsets, kappa):
        checked += 1
        res = _family_comp(model, list(fam))
        if not res["comp_holds"]:
            failures.append([_label(x) for x in fam])
    return {**base, "kind": f"comp_kappa({kappa})", "families_checked": checked,
            "comp_holds": not failures, "counterexamples": failures,
            "plain_comparability_holds": True}


def _family_comp(model, fam) -> dict:
    rows, comparable = [], 0
    for (p, x), (q, y) in itertools.combinations(list(enumerate(fam)), 2):
        if x == y:
            res = {"direction": "identity", "witness": None}
        else:
            res = sym_comparable(x, y, model)
        plain = True  # finite sets always compare without symmetry constraints
        rows.append({
            "pair": [_label(x), _label(y)],
            "symmetric_comparable": res is not None,
            "direction": None if res is None else res["direction"],
            "witness": None if res is None or res["witness"] is None else res["witness"].as_dict(),
            "plain_comparable": plain,
            "sizes": [len(x) * model.N, len(y) * model.N],
        })
        comparable += res is not None
    return {"members": [_label(x) for x in fam], "pairs": rows,
            "comparable_pairs": comparable, "comp_holds": comparable > 0,
            "plain_comparability_holds": True}


def poset_realization(model: FmModel, direct_limit: int = 2) -> dict:
    """Does i ⪯ j match a symmetric injection S_î -> S_ĵ (î the down-set of i)?

    Pairs whose down-sets exceed direct_limit indices are decided by the
    subset rule (a symmetric injection exists iff one down-set contains the
    other), which the direct searches verify on smaller sets.
    """
    spec = model.spec
    rows, agree = [], True
    for i in spec.indices:
        for j in spec.indices:
            di, dj = spec.down(i), spec.down(j)
            if len(di) <= direct_limit and len(dj) <= direct_limit:
                found = symmetric_injection_exists(di, dj, model) is not None
                method = "search"
            else:
                found = di <= dj
                method = "subset-rule"
            ok = found == spec.leq(i, j)
            agree &= ok
            rows.append({"i": i, "j": j, "leq": spec.leq(i, j), "symmetric_injection": found,
                         "method": method, "agrees": ok})
    return {"N": model.N, "s": model.s, "rows": rows, "agrees": agree}


def all_partial_orders(indices) -> list:
    """Every partial order on the given indices (as FmSpec-ready pair sets)."""
    idx = list(indices)
    off = [(i, j) for i in idx for j in idx if i != j]
    out = []
    for r in range(len(off) + 1):
        for chosen in itertools.combinations(off, r):
            order = {(i, i) for i in idx} | set(chosen)
            if any((j, i) in order for i, j in chosen):
                continue
            if all((i, l) in order for (i, j) in order for (k, l) in order if j == k):
                out.append(frozenset(order))
    return out


def vp_comp_demo(family) -> Optional[dict]:
    """Two distinct members of a family of bare sets with an injection between them."""
    members = list(family)
    for S in members:
        if S.predicates or S.I:
            raise StructureError("members must be bare sets (no predicates, no constants)")
    if len(members) < 2:
        return None
    order = sorted(range(len(members)), key=lambda p: (len(members[p].elements), p))
    p, q = order[0], order[1]
    S, T = members[p], members[q]
    found = enumerate_morphisms("embedding", S, T, limit=1)
    if not found:
        return None
    reason = "equal sizes: bijection" if len(S.elements) == len(T.elements) else "sizes differ"
    return {"src": p, "dst": q, "injection": found[0].row()["map"], "reason": reason}


def bare_structure(elems, name="") -> Structure:
    return Structure.build(elems, predicates=(), name=name)


# -- spec files ---------------------------------------------------------------

def parse_spec(text: str) -> FmSpec:
    """Lines 'indices: i, j', 'order: i<=j, ...', 'N: 3', 's: 1'; '%' starts a comment."""
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError(f"line {lineno}: expected 'key: value'")
        key, val = (s.strip() for s in line.split(":", 1))
        if key in fields:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = val
    for key in ("indices", "N", "s"):
        if key not in fields:
            raise ParseError(f"missing {key!r}")
    indices = [t.strip() for t in fields["indices"].split(",") if t.strip()]
    pairs = []
    for item in fields.get("order", "").split(","):
        item = item.strip()
        if not item:
            continue
        if "<=" not in item:
            raise ParseError(f"order entry {item!r} must look like 'i<=j'")
        i, j = (t.strip() for t in item.split("<=", 1))
        pairs.append((i, j))
    try:
        return FmSpec.from_pairs(indices, pairs, int(fields["N"]), int(fields["s"]))
    except ValueError as exc:
        raise ParseError(str(exc)) from None
