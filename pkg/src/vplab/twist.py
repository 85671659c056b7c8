"""Membership twisted by a permutation of a finite transitive fragment.

x ∈_π y means x ∈ π(y).  Formulas in the pure ∈-language can be evaluated two
ways: directly with ∈_π, or after rewriting every atom x ∈ y to x ∈ π(y) and
evaluating with plain ∈.  The two routes share no evaluation code.
"""
from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import networkx as nx

from .errors import FormulaError, GuardExceeded, ParseError, StructureError
from .hf import EMPTY, HSet, canon, format_hset, hset, kpair, parse_hset_prefix, unpair
from .morphisms import is_k_elementary
from .sat import Structure

DEFAULT_FRAGMENT_GUARD = 4096


# -- fragments ---------------------------------------------------------------

def transitive_closure(seeds, guard: int = DEFAULT_FRAGMENT_GUARD) -> list:
    """Seeds together with all their hereditary elements, in canonical order."""
    out = set()
    stack = list(seeds)
    while stack:
        x = stack.pop()
        if x in out:
            continue
        if not isinstance(x, HSet):
            raise TypeError("fragments hold pure sets only")
        out.add(x)
        if len(out) > guard:
            raise GuardExceeded("fragment closure", guard, len(out))
        stack.extend(x.elements)
    return sorted(out, key=lambda v: v.key)


class UniverseFragment:
    """A finite transitive W with a bijection π: W → W."""

    def __init__(self, W: Sequence[HSet], pi: Optional[Mapping] = None):
        self.W = tuple(sorted(set(W), key=lambda v: v.key))
        self.members = frozenset(self.W)
        for y in self.W:
            for x in y:
                if x not in self.members:
                    raise StructureError(f"W is not transitive: {format_hset(x)} ∈ "
                                         f"{format_hset(y)} is missing")
        pi = dict(pi or {})
        for x, y in pi.items():
            if x not in self.members or y not in self.members:
                raise StructureError(f"π mentions {format_hset(x if x not in self.members else y)}"
                                     " outside W")
        self.pi = {x: pi.get(x, x) for x in self.W}
        if len(set(self.pi.values())) != len(self.W):
            raise StructureError("π is not a bijection on W")
        self.pinv = {y: x for x, y in self.pi.items()}

    def __len__(self):
        return len(self.W)

    def __contains__(self, x):
        return x in self.members

    def require(self, x, what="element"):
        if x not in self.members:
            raise StructureError(f"{what} {format_hset(x)} is outside W")
        return x

    def apply(self, x):
        return self.pi[self.require(x)]

    def apply_inv(self, x):
        return self.pinv[self.require(x)]

    def is_identity(self) -> bool:
        return all(x is y for x, y in self.pi.items())

    def moved(self) -> list:
        return [x for x in self.W if self.pi[x] is not x]

    def cycles(self) -> list:
        seen, out = set(), []
        for x in self.W:
            if x in seen or self.pi[x] is x:
                continue
            cyc, y = [], x
            while y not in seen:
                seen.add(y)
                cyc.append(y)
                y = self.pi[y]
            out.append(cyc)
        return out


def fragment(seeds, cycles=(), guard: int = DEFAULT_FRAGMENT_GUARD) -> UniverseFragment:
    """Close the seeds (and every cycle entry) under elements; π from disjoint cycles."""
    cycles = [list(c) for c in cycles]
    W = transitive_closure(itertools.chain(seeds, *cycles), guard)
    return UniverseFragment(W, cycles_to_map(cycles))


def pair_seeds(pairs) -> list:
    """{x}, {x,y} and ⟨x,y⟩ for each pair: what the pairing equation needs in W."""
    out = []
    for x, y in pairs:
        out.extend((hset(x), hset(x, y), kpair(x, y)))
    return out


def swap_fragment(X: HSet, Y: HSet, extra=(), guard: int = DEFAULT_FRAGMENT_GUARD):
    """Transpose X and Y; {X} is included so a Foundation witness is available."""
    if X is Y:
        raise ValueError("swap needs two distinct sets")
    return fragment([X, Y, hset(X), *extra], [[X, Y]], guard)


def cycle_closure(U: UniverseFragment, guard: int = DEFAULT_FRAGMENT_GUARD) -> UniverseFragment:
    """Add, for each cycle C of the ∈_π digraph, a set whose π-image is C.

    New sets are fixed by π and are members of nothing old, so no new cycles
    appear and one pass suffices.
    """
    G = membership_digraph(U)
    extra = []
    for cyc in nx.simple_cycles(G):
        target = canon(cyc)
        if target not in U.members:
            extra.append(target)
        if len(U) + len(extra) > guard:
            raise GuardExceeded("cycle closure", guard, len(U) + len(extra))
    if not extra:
        return U
    W = transitive_closure(itertools.chain(U.W, extra), guard)
    return UniverseFragment(W, U.pi)


def cycles_to_map(cycles) -> dict:
    pi = {}
    for cyc in cycles:
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            if a in pi:
                raise ParseError(f"cycles are not disjoint: {format_hset(a)} repeats")
            pi[a] = b
    return pi


def parse_permutation(text: str) -> list:
    """'({},{{}}) (n:2, n:3, n:4)' -> list of cycles.  Empty text is the identity."""
    cycles, pos = [], 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            cycles_to_map(cycles)
            return cycles
        if text[pos] != "(":
            raise ParseError("expected '(' to open a cycle", text, pos)
        pos += 1
        cyc = []
        while True:
            x, pos = parse_hset_prefix(text, pos)
            cyc.append(x)
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos < len(text) and text[pos] == ",":
                pos += 1
                continue
            if pos < len(text) and text[pos] == ")":
                pos += 1
                break
            raise ParseError("expected ',' or ')' in cycle", text, pos)
        cycles.append(cyc)


def format_permutation(U: UniverseFragment) -> str:
    return " ".join("(" + ", ".join(format_hset(x) for x in c) + ")" for c in U.cycles())


# -- ∈-formulas --------------------------------------------------------------

@dataclass(frozen=True)
class TVar:
    n: int


@dataclass(frozen=True)
class Lit:
    value: HSet


@dataclass(frozen=True)
class PiOf:
    """π applied to a variable's value; only produced by translation."""
    var: TVar


TTerm = Union[TVar, Lit, PiOf]


@dataclass(frozen=True)
class Mem:
    left: TTerm
    right: TTerm


@dataclass(frozen=True)
class TEq:
    left: TTerm
    right: TTerm


@dataclass(frozen=True)
class TNot:
    body: "TFormula"


@dataclass(frozen=True)
class TAnd:
    left: "TFormula"
    right: "TFormula"


@dataclass(frozen=True)
class TExists:
    """∃v φ, or ∃v ∈ bound φ when bound is given."""
    var: int
    body: "TFormula"
    bound: Optional[TTerm] = None


TFormula = Union[Mem, TEq, TNot, TAnd, TExists]


def t_or(a, b):
    return TNot(TAnd(TNot(a), TNot(b)))


def t_forall(v, body, bound=None):
    return TNot(TExists(v, TNot(body), bound))


def t_conj(parts):
    parts = list(parts)
    acc = parts[0]
    for p in parts[1:]:
        acc = TAnd(acc, p)
    return acc


def t_vars(phi) -> frozenset:
    """Free variables."""
    if isinstance(phi, (Mem, TEq)):
        out = set()
        for t in (phi.left, phi.right):
            if isinstance(t, TVar):
                out.add(t.n)
            elif isinstance(t, PiOf):
                out.add(t.var.n)
        return frozenset(out)
    if isinstance(phi, TNot):
        return t_vars(phi.body)
    if isinstance(phi, TAnd):
        return t_vars(phi.left) | t_vars(phi.right)
    inner = t_vars(phi.body) - {phi.var}
    if phi.bound is not None:
        inner |= t_vars(TEq(phi.bound, phi.bound))
    return inner


def is_translated(phi) -> bool:
    if isinstance(phi, (Mem, TEq)):
        return any(isinstance(t, PiOf) for t in (phi.left, phi.right))
    if isinstance(phi, TNot):
        return is_translated(phi.body)
    if isinstance(phi, TAnd):
        return is_translated(phi.left) or is_translated(phi.right)
    return is_translated(phi.body) or isinstance(phi.bound, PiOf)


_TLEX = re.compile(r"\s*(?:(?P<var>v\d+)|(?P<kw>in\b|E\b|A\b)|(?P<sym>->|[=!&|().]))")


class _TwistParser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def _ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self):
        self._ws()
        if self.pos >= len(self.text):
            return ("eof", "")
        if self.text[self.pos] in "{#n" and not self.text.startswith("in", self.pos):
            return ("lit", self.text[self.pos])
        m = _TLEX.match(self.text, self.pos)
        if m is None:
            raise ParseError(f"unexpected character {self.text[self.pos]!r}", self.text, self.pos)
        return (m.lastgroup, m.group(m.lastgroup))

    def _take(self, val):
        kind, got = self._peek()
        if got != val:
            raise ParseError(f"expected {val!r}, found {got or 'end of input'!r}", self.text, self.pos)
        self.pos += len(val)

    def term(self):
        kind, val = self._peek()
        if kind == "var":
            self.pos += len(val)
            return TVar(int(val[1:]))
        if kind == "lit":
            x, self.pos = parse_hset_prefix(self.text, self.pos)
            if not isinstance(x, HSet):
                raise ParseError("atoms are not allowed in twisted formulas", self.text, self.pos)
            return Lit(x)
        raise ParseError(f"expected a term, found {val or 'end of input'!r}", self.text, self.pos)

    def formula(self):
        kind, val = self._peek()
        if val == "!":
            self.pos += 1
            return TNot(self.formula())
        if kind == "kw" and val in ("E", "A"):
            self.pos += 1
            v = self.term()
            if not isinstance(v, TVar):
                raise ParseError("quantifiers bind variables", self.text, self.pos)
            bound = None
            if self._peek() == ("kw", "in"):
                self.pos += 2
                bound = self.term()
            self._take(".")
            body = self.formula()
            return TExists(v.n, body, bound) if val == "E" else t_forall(v.n, body, bound)
        if val == "(":
            self.pos += 1
            left = self.formula()
            _, op = self._peek()
            if op not in ("&", "|", "->"):
                raise ParseError(f"expected '&', '|' or '->', found {op or 'end of input'!r}",
                                 self.text, self.pos)
            self.pos += len(op)
            right = self.formula()
            self._take(")")
            if op == "&":
                return TAnd(left, right)
            if op == "|":
                return t_or(left, right)
            return TNot(TAnd(left, TNot(right)))
        t = self.term()
        kind, val = self._peek()
        if val == "=":
            self.pos += 1
            return TEq(t, self.term())
        if kind == "kw" and val == "in":
            self.pos += 2
            return Mem(t, self.term())
        raise ParseError(f"expected '=' or 'in', found {val or 'end of input'!r}", self.text, self.pos)


def parse_twist_formula(text: str) -> TFormula:
    p = _TwistParser(text)
    phi = p.formula()
    p._ws()
    if p.pos != len(text):
        raise ParseError("trailing input", text, p.pos)
    return phi


def format_twist_formula(phi) -> str:
    def ft(t):
        if isinstance(t, TVar):
            return f"v{t.n}"
        if isinstance(t, Lit):
            return format_hset(t.value)
        return f"pi(v{t.var.n})"
    if isinstance(phi, Mem):
        return f"{ft(phi.left)} in {ft(phi.right)}"
    if isinstance(phi, TEq):
        return f"{ft(phi.left)} = {ft(phi.right)}"
    if isinstance(phi, TNot):
        return "!" + format_twist_formula(phi.body)
    if isinstance(phi, TAnd):
        return f"({format_twist_formula(phi.left)} & {format_twist_formula(phi.right)})"
    b = "" if phi.bound is None else f" in {ft(phi.bound)}"
    return f"E v{phi.var}{b}. {format_twist_formula(phi.body)}"


# -- route 1: twisted membership --------------------------------------------

def mem_pi(x, y, U: UniverseFragment) -> bool:
    U.require(x)
    return x in U.apply(y)


def members_pi(y, U: UniverseFragment) -> tuple:
    """The ∈_π-members of y."""
    return U.apply(y).elements


def _value(t, U, env):
    if isinstance(t, TVar):
        try:
            return env[t.n]
        except KeyError:
            raise FormulaError(f"unbound variable v{t.n}") from None
    if isinstance(t, Lit):
        return U.require(t.value, "literal")
    raise FormulaError("π-applied terms belong to translated formulas")


def eval_twisted(phi: TFormula, U: UniverseFragment, env: Optional[Mapping] = None) -> bool:
    env = dict(env or {})
    for v, x in env.items():
        U.require(x, f"value of v{v}")
    return _twisted(phi, U, env)


def _twisted(phi, U, env):
    if isinstance(phi, Mem):
        return mem_pi(_value(phi.left, U, env), _value(phi.right, U, env), U)
    if isinstance(phi, TEq):
        return _value(phi.left, U, env) is _value(phi.right, U, env)
    if isinstance(phi, TNot):
        return not _twisted(phi.body, U, env)
    if isinstance(phi, TAnd):
        return _twisted(phi.left, U, env) and _twisted(phi.right, U, env)
    domain = U.W if phi.bound is None else members_pi(_value(phi.bound, U, env), U)
    saved = env.get(phi.var, _MISSING)
    try:
        for x in domain:
            env[phi.var] = x
            if _twisted(phi.body, U, env):
                return True
        return False
    finally:
        _restore(env, phi.var, saved)


_MISSING = object()


def _restore(env, var, saved):
    if saved is _MISSING:
        env.pop(var, None)
    else:
        env[var] = saved


# -- route 2: translate, then evaluate with plain membership ------------------

def translate(phi: TFormula, U: UniverseFragment) -> TFormula:
    """φ^π: each y on the right of ∈ (and each ∈-bound) becomes π(y)."""
    def right(t):
        if isinstance(t, Lit):
            return Lit(U.apply(t.value))
        if isinstance(t, TVar):
            return PiOf(t)
        raise FormulaError("formula is already translated")

    if isinstance(phi, Mem):
        return Mem(phi.left, right(phi.right))
    if isinstance(phi, TEq):
        return phi
    if isinstance(phi, TNot):
        return TNot(translate(phi.body, U))
    if isinstance(phi, TAnd):
        return TAnd(translate(phi.left, U), translate(phi.right, U))
    bound = None if phi.bound is None else right(phi.bound)
    return TExists(phi.var, translate(phi.body, U), bound)


def _plain_term(t, U, env):
    if isinstance(t, TVar):
        if t.n not in env:
            raise FormulaError(f"unbound variable v{t.n}")
        return env[t.n]
    if isinstance(t, Lit):
        if t.value not in U.members:
            raise StructureError(f"literal {format_hset(t.value)} is outside W")
        return t.value
    x = _plain_term(t.var, U, env)
    return U.pi[x]


def _plain(phi, U, env):
    if isinstance(phi, Mem):
        x, y = _plain_term(phi.left, U, env), _plain_term(phi.right, U, env)
        return x in y.members
    if isinstance(phi, TEq):
        return _plain_term(phi.left, U, env) is _plain_term(phi.right, U, env)
    if isinstance(phi, TNot):
        return not _plain(phi.body, U, env)
    if isinstance(phi, TAnd):
        return _plain(phi.left, U, env) and _plain(phi.right, U, env)
    if phi.bound is None:
        domain = U.W
    else:
        domain = _plain_term(phi.bound, U, env).elements
    inner = dict(env)
    for x in domain:
        inner[phi.var] = x
        if _plain(phi.body, U, inner):
            return True
    return False


def eval_translated(phi: TFormula, U: UniverseFragment, env: Optional[Mapping] = None) -> bool:
    env = dict(env or {})
    for v, x in env.items():
        if x not in U.members:
            raise StructureError(f"value of v{v} is outside W")
    return _plain(translate(phi, U), U, env)


# -- pairs under twisted membership ------------------------------------------

def kpair_twisted(x, y, U: UniverseFragment) -> Optional[HSet]:
    """z = π⁻¹({π⁻¹({x}), π⁻¹({x,y})}): the set V_π sees as the pair of x, y.

    None when one of the sets involved is not in W.
    """
    U.require(x)
    U.require(y)
    sx, sxy = hset(x), hset(x, y)
    if sx not in U.members or sxy not in U.members:
        return None
    inner = hset(U.pinv[sx], U.pinv[sxy])
    if inner not in U.members:
        return None
    return U.pinv[inner]


def unpair_twisted(z, U: UniverseFragment) -> Optional[tuple]:
    """(x, y) with kpair_twisted(x, y) = z, or None."""
    outer = members_pi(U.require(z), U)
    if not 1 <= len(outer) <= 2:
        return None
    images = [U.apply(w) for w in outer]
    pr = unpair(canon(images))
    if pr is None:
        return None
    return pr if kpair_twisted(pr[0], pr[1], U) is z else None


def untup_twisted(t, n: int, U: UniverseFragment) -> Optional[list]:
    if n == 0:
        return None
    out = []
    for _ in range(n - 1):
        pr = unpair_twisted(t, U)
        if pr is None:
            return None
        t, last = pr
        out.append(last)
    out.append(t)
    out.reverse()
    return out


# "v0 is the pair of v1 and v2", bounded so that evaluation stays cheap.
PAIR_FORMULA = parse_twist_formula(
    "E v3 in v0. E v4 in v0. ((A v5 in v0. (v5 = v3 | v5 = v4) & "
    "(v1 in v3 & A v5 in v3. v5 = v1)) & ((v1 in v4 & v2 in v4) & A v5 in v4. (v5 = v1 | v5 = v2)))"
)


def pair_search(x, y, U: UniverseFragment) -> list:
    """Every z in W satisfying the pair formula for (x, y) under ∈_π."""
    return [z for z in U.W if eval_twisted(PAIR_FORMULA, U, {0: z, 1: x, 2: y})]


def pair_hypothesis(x, y, U: UniverseFragment) -> list:
    """Sets among {x}, {x,y}, ⟨x,y⟩ that π fails to fix (or that are not in W)."""
    bad = []
    for s in (hset(x), hset(x, y), kpair(x, y)):
        if s not in U.members or U.pi[s] is not s:
            bad.append(s)
    return bad


def relation_check(Q, M, N, U: UniverseFragment) -> tuple:
    """(Q ⊆ M×N) read in V_π versus π(Q) ⊆ π(M)×π(N) read in V."""
    phi = parse_twist_formula(
        "A v0 in v10. E v1 in v11. E v2 in v12. E v3 in v0. E v4 in v0. "
        "((A v5 in v0. (v5 = v3 | v5 = v4) & (v1 in v3 & A v5 in v3. v5 = v1)) & "
        "((v1 in v4 & v2 in v4) & A v5 in v4. (v5 = v1 | v5 = v2)))")
    twisted = eval_twisted(phi, U, {10: Q, 11: M, 12: N})
    pQ, pM, pN = U.apply(Q), U.apply(M), U.apply(N)
    straight = all((pr := unpair(q)) is not None and pr[0] in pM and pr[1] in pN for q in pQ)
    return twisted, straight


# -- structures under π -------------------------------------------------------

def _components(S: Structure) -> list:
    parts = [("M", S.M)]
    if "U" in S.predicates:
        parts.append(("U", S.U))
    if "R" in S.predicates:
        parts.append(("R", S.R))
    parts.append(("I", S.I_set))
    return parts


def _assemble(S: Structure, comps: dict, pairs_of, name) -> Structure:
    R = []
    for p in comps.get("R", EMPTY):
        pr = pairs_of(p)
        if pr is None:
            raise StructureError(f"{format_hset(p)} in the relation is not a pair")
        R.append(pr)
    I = {}
    for p in comps["I"]:
        pr = pairs_of(p)
        if pr is None:
            raise StructureError(f"{format_hset(p)} in the constant map is not a pair")
        if pr[0] in I:
            raise StructureError("constant map is not a function")
        I[pr[0]] = pr[1]
    return Structure.build(comps["M"], comps.get("U", EMPTY), R, I, predicates=S.predicates,
                           name=name)


def structure_pi(S: Structure, U: UniverseFragment) -> Structure:
    """⟨π(M), π(U), π(R), π(I)⟩, π acting on each component as a set."""
    comps = {k: U.pi[U.require(v, f"component {k}")] for k, v in _components(S)}
    return _assemble(S, comps, unpair, name=f"{S.label()}^π")


def twisted_decode(S: Structure, U: UniverseFragment) -> Optional[Structure]:
    """Read S's code inside V_π: unpair with ∈_π, take ∈_π-members of each part."""
    code = U.require(S.code(), "structure code")
    parts = untup_twisted(code, len(_components(S)), U)
    if parts is None:
        return None
    comps = {k: canon(members_pi(p, U)) for (k, _), p in zip(_components(S), parts)}
    try:
        return _assemble(S, comps, lambda p: unpair_twisted(p, U), name=f"{S.label()} in V_π")
    except StructureError:
        return None


def _tuple_levels(t, n):
    """The (head, last) pairs that make up an n-tuple code."""
    out = []
    for _ in range(n - 1):
        pr = unpair(t)
        out.append(pr)
        t = pr[0]
    return out


def map_code(f: Mapping) -> HSet:
    return canon(kpair(x, y) for x, y in f.items())


def structure_hypotheses(S: Structure, U: UniverseFragment) -> list:
    """Pairs whose fixing the transfer relies on, as (x, y) tuples."""
    pairs = list(_tuple_levels(S.code(), len(_components(S))))
    comps = dict(_components(S))
    for k in ("R", "I"):
        if k in comps and comps[k] in U.members:
            for p in U.apply(comps[k]):
                pr = unpair(p)
                if pr is not None:
                    pairs.append(pr)
    if S.M in U.members:
        M = U.apply(S.M)
        pairs.extend((x, y) for x in M for y in M)
    return pairs


@dataclass
class Key2Result:
    holds: bool
    hypotheses_ok: bool
    violations: list = field(default_factory=list)
    twisted_side: Optional[bool] = None
    straight_side: Optional[bool] = None
    atomic_transfer: Optional[bool] = None
    note: str = ""

    def __bool__(self):
        return self.holds

    def as_dict(self):
        return {
            "holds": self.holds,
            "hypotheses_ok": self.hypotheses_ok,
            "violations": [format_hset(v) for v in self.violations],
            "twisted_side": self.twisted_side,
            "straight_side": self.straight_side,
            "atomic_transfer": self.atomic_transfer,
            "note": self.note,
        }


def key2_check(S: Structure, T: Structure, f: Mapping, U: UniverseFragment, k: int) -> Key2Result:
    """Compare k-elementarity of f read in V_π with that of π(f) between S^π and T^π."""
    fc = map_code(f)
    for obj, what in ((S.code(), "code of S"), (T.code(), "code of T"), (fc, "code of f")):
        if obj not in U.members:
            return Key2Result(False, False, [obj], note=f"{what} is outside W")
    pairs = structure_hypotheses(S, U) + structure_hypotheses(T, U)
    pairs.extend(p for p in map(unpair, U.apply(fc)) if p is not None)
    violations = []
    for x, y in pairs:
        for bad in pair_hypothesis(x, y, U):
            if bad not in violations:
                violations.append(bad)
    ok = not violations

    # The images of the components must still have the shape of a structure.
    for A in (S, T):
        try:
            structure_pi(A, U)
        except StructureError as exc:
            moved = [v for _, v in _components(A) if U.pi[v] is not v]
            return Key2Result(False, False, violations + moved,
                              note=f"π does not carry {A.label()} to a structure: {exc}")
    Sp, Tp = structure_pi(S, U), structure_pi(T, U)
    St, Tt = twisted_decode(S, U), twisted_decode(T, U)
    if St is None or Tt is None:
        return Key2Result(False, ok, violations, note="twisted decode failed")

    f_straight = {}
    for p in U.apply(fc):
        pr = unpair(p)
        if pr is not None:
            f_straight[pr[0]] = pr[1]
    f_twisted = {}
    for p in members_pi(fc, U):
        pr = unpair_twisted(p, U)
        if pr is not None:
            f_twisted[pr[0]] = pr[1]

    def k_elem(A, B, g):
        try:
            return is_k_elementary(A, B, g, k)
        except StructureError:
            return False

    twisted_side = k_elem(St, Tt, f_twisted)
    straight_side = k_elem(Sp, Tp, f_straight)

    transfer = True
    for A in (S, T):
        if "R" in A.predicates and A.M in U.members:
            piM, piR = U.apply(A.M), U.apply(A.R)
            for x in piM:
                for y in piM:
                    z = kpair_twisted(x, y, U)
                    lhs = z is not None and mem_pi(z, A.R, U)
                    if lhs != (kpair(x, y) in piR):
                        transfer = False
        if "U" in A.predicates:
            piU = U.apply(A.U)
            for x in U.apply(A.M):
                if mem_pi(x, A.U, U) != (x in piU):
                    transfer = False
    holds = (twisted_side == straight_side) and transfer
    return Key2Result(holds, ok, violations, twisted_side, straight_side, transfer)


# -- Foundation --------------------------------------------------------------

def membership_digraph(U: UniverseFragment) -> "nx.DiGraph":
    """Edge w -> m whenever w ∈_π m."""
    G = nx.DiGraph()
    G.add_nodes_from(range(len(U.W)))
    index = {x: i for i, x in enumerate(U.W)}
    for m in U.W:
        for w in members_pi(m, U):
            G.add_edge(index[w], index[m])
    return nx.relabel_nodes(G, dict(enumerate(U.W)))


def foundation_witness(U: UniverseFragment) -> Optional[tuple]:
    """(z, evidence) with z ∈_π-nonempty and no ∈_π-minimal member, or None.

    evidence maps each ∈_π-member m of z to some w ∈_π z with w ∈_π m.
    """
    for z in U.W:
        zs = members_pi(z, U)
        if not zs:
            continue
        evidence = {}
        for m in zs:
            below = [w for w in zs if mem_pi(w, m, U)]
            if not below:
                break
            evidence[m] = below[0]
        else:
            return z, evidence
    return None


# -- random generation (for sampling suites) ----------------------------------

def random_fragment(rng: random.Random, max_size: int = 12, rank: int = 3) -> UniverseFragment:
    """A transitive fragment of at most max_size sets with a random permutation."""
    pool = [EMPTY]
    for _ in range(rank):
        pool = sorted(set(pool) | {canon(c) for r in range(3)
                                   for c in itertools.combinations(pool, r)},
                      key=lambda v: v.key)
    while True:
        seeds = rng.sample(pool, k=min(len(pool), rng.randint(1, 4)))
        W = transitive_closure(seeds)
        if len(W) <= max_size:
            break
    perm = list(W)
    rng.shuffle(perm)
    return UniverseFragment(W, dict(zip(W, perm)))


def random_twist_formula(rng: random.Random, U: UniverseFragment, depth: int = 3,
                         nvars: int = 3) -> TFormula:
    def term():
        if rng.random() < 0.75:
            return TVar(rng.randrange(nvars))
        return Lit(rng.choice(U.W))

    def go(d):
        r = rng.random()
        if d == 0 or r < 0.3:
            if rng.random() < 0.7:
                return Mem(term(), term())
            return TEq(term(), term())
        if r < 0.5:
            return TNot(go(d - 1))
        if r < 0.7:
            return TAnd(go(d - 1), go(d - 1))
        bound = term() if rng.random() < 0.4 else None
        return TExists(rng.randrange(nvars), go(d - 1), bound)

    return go(depth)
