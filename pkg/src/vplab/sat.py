"""L_A-structures and two routes to truth.

``sat_oracle`` follows the bottom-up definition literally: it walks the
subformula witness f and builds, for each entry, the set g(k) of tuples in ᵐM
that satisfy it.  ``evaluate`` is an ordinary recursive evaluator.  The two
agree except on equations between two distinct constant names, which the
bottom-up definition makes false outright (g(k) = ∅) regardless of I.
"""
from __future__ import annotations

import contextlib
import contextvars
import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Optional, Sequence, Union

from .errors import FormulaError, ParseError, StructureError
from .hf import (EMPTY, HSet, Value, canon, format_hset, kpair, nat, parse_hset,
                 tuple_space, unpair)
from .syntax import (And, Eq, Exists, Formula, FormulaCode, Language, Not, RAtom,
                     UAtom, Var, decode_atomic, encode, fv, slot_count, split_compound)


@dataclass(frozen=True)
class Structure:
    """⟨M, U, R, I⟩ with I stored as a sorted tuple of (constant, element)."""

    M: HSet
    U: HSet = EMPTY
    R: HSet = EMPTY
    I: tuple = ()
    predicates: frozenset = frozenset({"U", "R"})
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "predicates", frozenset(self.predicates))
        if not isinstance(self.M, HSet):
            raise StructureError("domain must be a set")
        if not self.U.issubset(self.M):
            raise StructureError("U is not a subset of the domain")
        if self.U and "U" not in self.predicates:
            raise StructureError("U is nonempty but not declared")
        if self.R and "R" not in self.predicates:
            raise StructureError("R is nonempty but not declared")
        for p in self.R:
            pr = unpair(p)
            if pr is None or pr[0] not in self.M or pr[1] not in self.M:
                raise StructureError(f"R contains {format_hset(p)}, not a pair over the domain")
        keys = [a for a, _ in self.I]
        if len(set(keys)) != len(keys):
            raise StructureError("constant assignment is not a function")
        for a, x in self.I:
            if x not in self.M:
                raise StructureError(f"I({format_hset(a)}) = {format_hset(x)} is outside the domain")

    @classmethod
    def build(cls, domain, U=(), R=(), I: Optional[Mapping] = None,
              predicates=("U", "R"), name="") -> "Structure":
        M = domain if isinstance(domain, HSet) else canon(domain)
        I = dict(I or {})
        return cls(
            M=M,
            U=canon(U),
            R=canon(kpair(x, y) for x, y in R),
            I=tuple(sorted(I.items(), key=lambda kv: kv[0].key)),
            predicates=frozenset(predicates),
            name=name,
        )

    @cached_property
    def elements(self) -> tuple:
        return self.M.elements

    @cached_property
    def uset(self) -> frozenset:
        return self.U.members

    @cached_property
    def rpairs(self) -> frozenset:
        return frozenset(unpair(p) for p in self.R)

    @cached_property
    def interp(self) -> dict:
        return dict(self.I)

    @cached_property
    def pool(self) -> HSet:
        return canon(a for a, _ in self.I)

    @cached_property
    def language(self) -> Language:
        return Language(self.pool, self.predicates)

    @cached_property
    def I_set(self) -> HSet:
        return canon(kpair(a, x) for a, x in self.I)

    def code(self) -> HSet:
        """The structure as a set: ⟨M,U,R,I⟩, or a triple when U or R is absent."""
        from .hf import tup
        parts = [self.M]
        if "U" in self.predicates:
            parts.append(self.U)
        if "R" in self.predicates:
            parts.append(self.R)
        parts.append(self.I_set)
        return tup(*parts)

    def label(self) -> str:
        return self.name or f"<{format_hset(self.M)}>"

    def __repr__(self):
        return f"Structure({self.label()})"


def check_language(S: Structure, L: Language) -> None:
    if L.constant_pool is not S.pool:
        raise StructureError(
            f"language constants {format_hset(L.constant_pool)} do not match "
            f"the structure's {format_hset(S.pool)}")
    if not L.predicates <= S.predicates:
        raise StructureError("structure lacks predicates declared by the language")


# -- fault injection (selftest mutation hook) -------------------------------

FAULTS = ("negation", "const-eq", "exists")
_active_faults: contextvars.ContextVar = contextvars.ContextVar("sat_faults", default=frozenset())


@contextlib.contextmanager
def inject_fault(name: str):
    """Deliberately corrupt one clause of sat_oracle inside the block."""
    if name not in FAULTS:
        raise ValueError(f"unknown fault {name!r}; choose from {FAULTS}")
    token = _active_faults.set(_active_faults.get() | {name})
    try:
        yield
    finally:
        _active_faults.reset(token)


# -- the bottom-up relation -------------------------------------------------

Assignment = Union[HSet, Sequence[Value], Mapping[int, Value]]


def _coerce_code(S: Structure, sigma) -> FormulaCode:
    if isinstance(sigma, FormulaCode):
        check_language(S, sigma.language)
        return sigma
    return encode(sigma, S.language)


def sat_oracle(S: Structure, sigma, e: Assignment, m: Optional[int] = None):
    """Return (e ∈ g(n-1), g) with g computed clause by clause.

    The slot count m defaults to one more than the largest variable index in
    sigma (free or bound), so h(i/x) is always defined.
    """
    fc = _coerce_code(S, sigma)
    need = slot_count(fc.ast())
    if m is None:
        m = need
    elif m < need:
        raise FormulaError(f"formula uses variable index {need - 1} but only {m} slots given")
    space = tuple_space(m, S.M)
    if isinstance(e, Mapping):
        e = _assignment_from_env(S, e, m)
    elif not isinstance(e, HSet):
        if len(e) != m:
            raise FormulaError(f"assignment has {len(e)} slots, expected {m}")
        e = space.code(tuple(e))
    if e not in space:
        raise FormulaError("assignment is not an element of the tuple space")

    faults = _active_faults.get()
    f = fc.witness
    index = {code: k for k, code in enumerate(f)}
    full = frozenset(space.elements)
    interp = S.interp
    g = []
    for k, fk in enumerate(f):
        atom = decode_atomic(fk, fc.language)
        if atom is not None:
            g.append(_atomic_clause(atom, S, space, full, interp, faults))
            continue
        parts = split_compound(fk)
        if parts[0] == "not":
            sub = g[index[parts[1]]]
            g.append(sub if "negation" in faults else full - sub)
        elif parts[0] == "and":
            g.append(g[index[parts[1]]] & g[index[parts[2]]])
        else:
            i, body = parts[1], g[index[parts[2]]]
            if "exists" in faults:
                g.append(frozenset(h for h in full
                                   if all(space.replace(h, i, x) in body for x in S.elements)))
            else:
                g.append(frozenset(h for h in full
                                   if any(space.replace(h, i, x) in body for x in S.elements)))
    return e in g[-1], g


def _atomic_clause(atom, S, space, full, interp, faults):
    read = space.read
    if isinstance(atom, Eq):
        t, s = atom.left, atom.right
        if isinstance(t, Var) and isinstance(s, Var):
            return frozenset(h for h in full if read(h, t.n) is read(h, s.n))
        if isinstance(t, Var):
            return frozenset(h for h in full if read(h, t.n) is interp[s.a])
        if isinstance(s, Var):
            return frozenset(h for h in full if read(h, s.n) is interp[t.a])
        if t.a is s.a:
            return full
        if "const-eq" in faults:
            return full if interp[t.a] is interp[s.a] else frozenset()
        return frozenset()
    if isinstance(atom, UAtom):
        t = atom.term
        if isinstance(t, Var):
            return frozenset(h for h in full if read(h, t.n) in S.uset)
        return full if interp[t.a] in S.uset else frozenset()
    t, s = atom.left, atom.right
    rp = S.rpairs
    if isinstance(t, Var) and isinstance(s, Var):
        return frozenset(h for h in full if (read(h, t.n), read(h, s.n)) in rp)
    if isinstance(t, Var):
        return frozenset(h for h in full if (read(h, t.n), interp[s.a]) in rp)
    if isinstance(s, Var):
        return frozenset(h for h in full if (interp[t.a], read(h, s.n)) in rp)
    return full if (interp[t.a], interp[s.a]) in rp else frozenset()


def _assignment_from_env(S: Structure, env: Mapping[int, Value], m: int) -> HSet:
    if m and not S.elements:
        raise StructureError("the empty domain admits no assignments")
    filler = S.elements[0] if S.elements else None
    coords = []
    for i in range(m):
        x = env.get(i, filler)
        if x not in S.M:
            raise StructureError(f"v{i} is assigned {format_hset(x)}, outside the domain")
        coords.append(x)
    return tuple_space(m, S.M).code(coords)


def sat(S: Structure, sigma, env: Mapping[int, Value]) -> bool:
    """Sat restricted to the free variables: env gives values for fv(sigma)."""
    phi = sigma.ast() if isinstance(sigma, FormulaCode) else sigma
    missing = fv(phi) - set(env)
    if missing:
        raise FormulaError(f"unbound free variable(s) {sorted(missing)}")
    truth, _ = sat_oracle(S, sigma, dict(env))
    return truth


# -- the recursive evaluator ------------------------------------------------

def _term_value(t, S: Structure, env):
    if isinstance(t, Var):
        try:
            return env[t.n]
        except KeyError:
            raise FormulaError(f"unbound variable v{t.n}") from None
    try:
        return S.interp[t.a]
    except KeyError:
        raise StructureError(f"constant c:{format_hset(t.a)} is not interpreted") from None


def evaluate(S: Structure, phi: Formula, env: Optional[Mapping[int, Value]] = None) -> bool:
    env = {} if env is None else env
    if isinstance(phi, Eq):
        return _term_value(phi.left, S, env) is _term_value(phi.right, S, env)
    if isinstance(phi, UAtom):
        return _term_value(phi.term, S, env) in S.uset
    if isinstance(phi, RAtom):
        return (_term_value(phi.left, S, env), _term_value(phi.right, S, env)) in S.rpairs
    if isinstance(phi, Not):
        return not evaluate(S, phi.body, env)
    if isinstance(phi, And):
        return evaluate(S, phi.left, env) and evaluate(S, phi.right, env)
    if isinstance(phi, Exists):
        inner = dict(env)
        for x in S.elements:
            inner[phi.var] = x
            if evaluate(S, phi.body, inner):
                return True
        return False
    raise FormulaError(f"not a formula: {phi!r}")


def sentence_holds(S: Structure, sigma: Formula) -> bool:
    if fv(sigma):
        raise FormulaError(f"not a sentence: free variables {sorted(fv(sigma))}")
    return evaluate(S, sigma, {})


# -- extensions over a finite class (used by the formula enumerator) -------

class PointSpace:
    """All (structure, var_bound-tuple) points, with formula extensions as bitmasks."""

    def __init__(self, structures: Sequence[Structure], var_bound: int):
        self.structures = list(structures)
        self.var_bound = var_bound
        self.points = []
        self.struct_mask = []
        for si, S in enumerate(self.structures):
            if var_bound and not S.elements:
                raise StructureError("empty structures have no points")
            mask = 0
            for coords in itertools.product(S.elements, repeat=var_bound):
                mask |= 1 << len(self.points)
                self.points.append((si, coords))
            self.struct_mask.append(mask)
        self.size = len(self.points)
        self.full = (1 << self.size) - 1
        self.fibers = []
        for v in range(var_bound):
            groups = {}
            for i, (si, coords) in enumerate(self.points):
                key = (si, coords[:v] + coords[v + 1:])
                groups[key] = groups.get(key, 0) | (1 << i)
            self.fibers.append(list(groups.values()))

    def atom_extension(self, phi: Formula) -> int:
        mask = 0
        for i, (si, coords) in enumerate(self.points):
            if evaluate(self.structures[si], phi, dict(enumerate(coords))):
                mask |= 1 << i
        return mask

    def exists(self, v: int, mask: int) -> int:
        out = 0
        for fib in self.fibers[v]:
            if mask & fib:
                out |= fib
        return out

    def holds_in(self, ext: int, si: int) -> bool:
        """Truth of a sentence-like extension in structure si (all points or none)."""
        m = self.struct_mask[si]
        part = ext & m
        if part and part != m:
            raise FormulaError("extension is not constant on the structure")
        return bool(part)


# -- structure files --------------------------------------------------------

_SECTION = re.compile(r"^\s*(domain|U|R|I|predicates)\s*:(.*)$")
_IDENT = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)")


def _split_items(text: str):
    """Split on commas that are not nested in braces or parentheses."""
    depth, start, out = 0, 0, []
    for i, ch in enumerate(text):
        if ch in "{(":
            depth += 1
        elif ch in "})":
            depth -= 1
        elif ch == "," and depth == 0:
            out.append(text[start:i])
            start = i + 1
    out.append(text[start:])
    return [s.strip() for s in out if s.strip()]


def _elem(item: str):
    # bare decimal numerals are von Neumann naturals
    return nat(int(item)) if item.isdigit() else parse_hset(item)


def _parse_pair(item: str):
    if not (item.startswith("(") and item.endswith(")")):
        raise ParseError(f"expected a pair '(x, y)', got {item!r}")
    inner = _split_items(item[1:-1])
    if len(inner) != 2:
        raise ParseError(f"expected exactly two coordinates in {item!r}")
    return _elem(inner[0]), _elem(inner[1])


def parse_structure(text: str, name: str = ""):
    """Parse a structure file; returns (Structure, constant-name table)."""
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0]
        if not line.strip():
            continue
        m = _SECTION.match(line)
        if m:
            current = m.group(1)
            if current in sections:
                raise ParseError(f"duplicate section {current!r} on line {lineno}")
            sections[current] = m.group(2)
        elif current is None:
            raise ParseError(f"line {lineno}: content before any section header")
        else:
            sections[current] += " " + line
    if "domain" not in sections:
        raise ParseError("missing 'domain:' section")
    domain = canon(_elem(x) for x in _split_items(sections["domain"]))
    if "predicates" in sections:
        preds = frozenset(_split_items(sections["predicates"]))
    else:
        preds = frozenset({"U", "R"})
    U = [_elem(x) for x in _split_items(sections.get("U", ""))]
    R = [_parse_pair(x) for x in _split_items(sections.get("R", ""))]
    names, interp = {}, {}
    auto = 0
    for item in _split_items(sections.get("I", "")):
        if "->" not in item:
            raise ParseError(f"constant entry {item!r} needs 'name -> element'")
        key, val = (s.strip() for s in item.split("->", 1))
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", key):
            a = nat(auto)
            auto += 1
            names[key] = a
        else:
            a = _elem(key)
            names[format_hset(a).replace("n:", "")] = a
        if a in interp:
            raise ParseError(f"constant {key!r} assigned twice (or collides with another name)")
        interp[a] = _elem(val)
    S = Structure.build(domain, U, R, interp, predicates=preds, name=name)
    return S, names


def format_structure(S: Structure, names: Optional[Mapping[str, Value]] = None) -> str:
    back = {a: n for n, a in (names or {}).items()}
    lines = ["domain: " + ", ".join(format_hset(x) for x in S.elements)]
    lines.append("predicates: " + ", ".join(sorted(S.predicates)))
    if "U" in S.predicates:
        lines.append("U: " + ", ".join(format_hset(x) for x in S.U))
    if "R" in S.predicates:
        lines.append("R: " + ", ".join(f"({format_hset(x)}, {format_hset(y)})"
                                      for x, y in sorted(S.rpairs, key=lambda p: (p[0].key, p[1].key))))
    if S.I:
        lines.append("I: " + ", ".join(f"{back.get(a, format_hset(a))} -> {format_hset(x)}"
                                      for a, x in S.I))
    return "\n".join(lines) + "\n"
