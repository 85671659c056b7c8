"""Set-coded first-order syntax for languages with constants c_a (a in A).

Symbols are naturals (≡=2, ¬=3, ∧=4, ∃=5, U=6, R=7), variables are pairs
<0,n>, constants are pairs <1,a>.  Formulas have two faces: a FormulaAst tree
for humans and algorithms, and a FormulaCode (HSet code plus a minimal
subformula witness) for the set-theoretic definitions.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence, Union

from .errors import FormulaError, GuardExceeded, ParseError
from .hf import EMPTY, HSet, Value, as_nat, canon, format_hset, kpair, nat, unpair

EQ, NEG, AND, EX, UPRED, RPRED = 2, 3, 4, 5, 6, 7
SYMBOL_CODES = (EQ, NEG, AND, EX, UPRED, RPRED)

DEFAULT_ENUM_GUARD = 200_000


# -- terms and formulas -----------------------------------------------------

@dataclass(frozen=True)
class Var:
    n: int

    def code(self) -> HSet:
        return kpair(nat(0), nat(self.n))


@dataclass(frozen=True)
class Const:
    a: Value

    def code(self) -> HSet:
        return kpair(nat(1), self.a)


Term = Union[Var, Const]


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class UAtom:
    term: Term


@dataclass(frozen=True)
class RAtom:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: int
    body: "Formula"


Formula = Union[Eq, UAtom, RAtom, Not, And, Exists]


def _cache_hash(cls):
    # Formulas are deep immutable trees; hash once per node.
    field_names = tuple(cls.__dataclass_fields__)

    def __hash__(self):
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash((cls.__name__,) + tuple(getattr(self, n) for n in field_names))
            object.__setattr__(self, "_hash", h)
            return h

    cls.__hash__ = __hash__
    return cls


for _cls in (Var, Const, Eq, UAtom, RAtom, Not, And, Exists):
    _cache_hash(_cls)
ATOMIC = (Eq, UAtom, RAtom)


def Or(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def Implies(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def Forall(v: int, body: Formula) -> Formula:
    return Not(Exists(v, Not(body)))


def conj(parts: Sequence[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        raise ValueError("empty conjunction")
    acc = parts[0]
    for p in parts[1:]:
        acc = And(acc, p)
    return acc


@dataclass(frozen=True)
class Language:
    """L_A: the constant pool A and the declared predicates (subset of U, R)."""

    constant_pool: HSet = EMPTY
    predicates: frozenset = frozenset({"U", "R"})

    def __post_init__(self):
        if not isinstance(self.constant_pool, HSet):
            raise TypeError("constant pool must be a set")
        object.__setattr__(self, "predicates", frozenset(self.predicates))
        if not self.predicates <= {"U", "R"}:
            raise ValueError(f"unknown predicates {set(self.predicates) - {'U', 'R'}}")

    @classmethod
    def of(cls, constants=(), predicates=("U", "R")) -> "Language":
        return cls(canon(constants), frozenset(predicates))

    def constants(self):
        return self.constant_pool.elements


# -- structural helpers -----------------------------------------------------

def terms_of(phi: Formula) -> tuple:
    if isinstance(phi, (Eq, RAtom)):
        return (phi.left, phi.right)
    if isinstance(phi, UAtom):
        return (phi.term,)
    return ()


def children(phi: Formula) -> tuple:
    if isinstance(phi, Not):
        return (phi.body,)
    if isinstance(phi, And):
        return (phi.left, phi.right)
    if isinstance(phi, Exists):
        return (phi.body,)
    return ()


def fold(phi: Formula, atom, neg, conj_, exists):
    """Structural recursion: the closure-induction principle as a function."""
    if isinstance(phi, ATOMIC):
        return atom(phi)
    if isinstance(phi, Not):
        return neg(fold(phi.body, atom, neg, conj_, exists))
    if isinstance(phi, And):
        return conj_(fold(phi.left, atom, neg, conj_, exists),
                     fold(phi.right, atom, neg, conj_, exists))
    if isinstance(phi, Exists):
        return exists(phi.var, fold(phi.body, atom, neg, conj_, exists))
    raise FormulaError(f"not a formula: {phi!r}")


def fv(phi: Formula) -> frozenset:
    return fold(
        phi,
        lambda a: frozenset(t.n for t in terms_of(a) if isinstance(t, Var)),
        lambda s: s,
        lambda s, t: s | t,
        lambda v, s: s - {v},
    )


def var_indices(phi: Formula) -> frozenset:
    """Every variable index occurring in phi, free or bound."""
    return fold(
        phi,
        lambda a: frozenset(t.n for t in terms_of(a) if isinstance(t, Var)),
        lambda s: s,
        lambda s, t: s | t,
        lambda v, s: s | {v},
    )


def slot_count(phi: Formula) -> int:
    return max(var_indices(phi), default=-1) + 1


def qrank(phi: Formula) -> int:
    return fold(phi, lambda a: 0, lambda r: r, max, lambda v, r: r + 1)


def size(phi: Formula) -> int:
    return fold(phi, lambda a: 1, lambda r: r + 1, lambda r, s: r + s + 1,
                lambda v, r: r + 1)


def constants_of(phi: Formula) -> frozenset:
    return fold(
        phi,
        lambda a: frozenset(t.a for t in terms_of(a) if isinstance(t, Const)),
        lambda s: s,
        lambda s, t: s | t,
        lambda v, s: s,
    )


def predicates_of(phi: Formula) -> frozenset:
    def atom(a):
        if isinstance(a, UAtom):
            return frozenset({"U"})
        if isinstance(a, RAtom):
            return frozenset({"R"})
        return frozenset()
    return fold(phi, atom, lambda s: s, lambda s, t: s | t, lambda v, s: s)


def subformulas(phi: Formula) -> list:
    """Distinct subformulas, each after its components (left to right)."""
    seen = {}

    def walk(p):
        if p in seen:
            return
        for c in children(p):
            walk(c)
        seen[p] = None

    walk(phi)
    return list(seen)


def check_well_formed(phi: Formula, L: Language) -> None:
    for a in constants_of(phi):
        if a not in L.constant_pool:
            raise FormulaError(f"constant c:{format_hset(a)} is not in the language's pool")
    missing = predicates_of(phi) - L.predicates
    if missing:
        raise FormulaError(f"predicate(s) {sorted(missing)} not declared in the language")
    for p in subformulas(phi):
        for t in terms_of(p):
            if isinstance(t, Var) and t.n < 0:
                raise FormulaError(f"negative variable index {t.n}")
        if isinstance(p, Exists) and p.var < 0:
            raise FormulaError(f"negative variable index {p.var}")


# -- set codes --------------------------------------------------------------

def code_of(phi: Formula) -> HSet:
    if isinstance(phi, Eq):
        return kpair(kpair(nat(EQ), phi.left.code()), phi.right.code())
    if isinstance(phi, UAtom):
        return kpair(nat(UPRED), phi.term.code())
    if isinstance(phi, RAtom):
        return kpair(kpair(nat(RPRED), phi.left.code()), phi.right.code())
    if isinstance(phi, Not):
        return kpair(nat(NEG), code_of(phi.body))
    if isinstance(phi, And):
        return kpair(kpair(nat(AND), code_of(phi.left)), code_of(phi.right))
    if isinstance(phi, Exists):
        return kpair(kpair(nat(EX), nat(phi.var)), code_of(phi.body))
    raise FormulaError(f"not a formula: {phi!r}")


def decode_term(t) -> Optional[Term]:
    pr = unpair(t)
    if pr is None:
        return None
    tag, x = pr
    if tag is nat(0):
        n = as_nat(x)
        return None if n is None else Var(n)
    if tag is nat(1):
        return Const(x)
    return None


_ATOMIC: dict = {}


def decode_atomic(x, L: Optional[Language] = None) -> Optional[Formula]:
    """Decode x if it lies in AFml(L_A); None otherwise."""
    try:
        result = _ATOMIC[x]
    except KeyError:
        result = _ATOMIC[x] = _decode_atomic_shape(x)
    except TypeError:
        result = _decode_atomic_shape(x)
    if result is None:
        return None
    if L is not None:
        if any(isinstance(t, Const) and t.a not in L.constant_pool for t in terms_of(result)):
            return None
        if isinstance(result, UAtom) and "U" not in L.predicates:
            return None
        if isinstance(result, RAtom) and "R" not in L.predicates:
            return None
    return result


def _decode_atomic_shape(x) -> Optional[Formula]:
    pr = unpair(x)
    if pr is None:
        return None
    head, last = pr
    if head is nat(UPRED):
        t = decode_term(last)
        return None if t is None else UAtom(t)
    hp = unpair(head)
    if hp is None:
        return None
    sym, t0 = hp
    if sym is nat(EQ) or sym is nat(RPRED):
        a, b = decode_term(t0), decode_term(last)
        if a is None or b is None:
            return None
        return Eq(a, b) if sym is nat(EQ) else RAtom(a, b)
    return None


def split_compound(x):
    """Return ('not', body), ('and', l, r), ('exists', m, body) or None."""
    pr = unpair(x)
    if pr is None:
        return None
    head, last = pr
    if head is nat(NEG):
        return ("not", last)
    hp = unpair(head)
    if hp is None:
        return None
    sym, mid = hp
    if sym is nat(AND):
        return ("and", mid, last)
    if sym is nat(EX):
        m = as_nat(mid)
        return None if m is None else ("exists", m, last)
    return None


def decode(code, L: Optional[Language] = None) -> Formula:
    memo = {}

    def go(x):
        if x in memo:
            return memo[x]
        a = decode_atomic(x, L)
        if a is not None:
            memo[x] = a
            return a
        parts = split_compound(x)
        if parts is None:
            raise FormulaError(f"not a formula code: {format_hset(x)}")
        if parts[0] == "not":
            r = Not(go(parts[1]))
        elif parts[0] == "and":
            r = And(go(parts[1]), go(parts[2]))
        else:
            r = Exists(parts[1], go(parts[2]))
        memo[x] = r
        return r

    return go(code)


@dataclass(frozen=True)
class FormulaCode:
    code: HSet
    witness: tuple
    language: Language = field(default_factory=Language)

    @property
    def length(self) -> int:
        return len(self.witness)

    def ast(self) -> Formula:
        return decode(self.code, self.language)


def encode(phi: Formula, L: Language) -> FormulaCode:
    check_well_formed(phi, L)
    witness = tuple(code_of(p) for p in subformulas(phi))
    return FormulaCode(witness[-1], witness, L)


def fml(x, f: Sequence, n: int, L: Language) -> bool:
    """The witness predicate Fml_{L_A}(x, f, n), clause by clause, no minimality."""
    if n == 0 or len(f) != n or f[n - 1] is not x:
        return False
    for k in range(n):
        fk = f[k]
        if decode_atomic(fk, L) is not None:
            continue
        earlier = f[:k]
        parts = split_compound(fk)
        if parts is None:
            return False
        if parts[0] == "not" and parts[1] in earlier:
            continue
        if parts[0] == "and" and parts[1] in earlier and parts[2] in earlier:
            continue
        if parts[0] == "exists" and parts[2] in earlier:
            continue
        return False
    return True


def subformula_codes(x, L: Language) -> Optional[set]:
    """Sub(x) computed on the code itself; None if x is not a formula code."""
    out = set()
    stack = [x]
    while stack:
        y = stack.pop()
        if y in out:
            continue
        if decode_atomic(y, L) is not None:
            out.add(y)
            continue
        parts = split_compound(y)
        if parts is None:
            return None
        out.add(y)
        if parts[0] == "not":
            stack.append(parts[1])
        elif parts[0] == "and":
            stack.extend(parts[1:])
        else:
            stack.append(parts[2])
    return out


def check_fml(x, f: Sequence, n: int, L: Language) -> bool:
    """Fml* : Fml holds and no strictly shorter witness exists.

    Every witness for x lists all of Sub(x) (each non-atomic entry forces its
    components earlier), so the least admissible length is |Sub(x)|.
    """
    try:
        if not fml(x, f, n, L):
            return False
    except TypeError:
        return False
    sub = subformula_codes(x, L)
    return sub is not None and n <= len(sub)


# -- text syntax ------------------------------------------------------------

_LEX = re.compile(
    r"\s*(?:(?P<var>v\d+)|(?P<const>c:[A-Za-z0-9_]+)|(?P<arrow>->)"
    r"|(?P<kw>[EAUR])(?![A-Za-uw-z0-9_])|(?P<sym>[=!&|().,]))"
)


def _default_constant(name: str) -> Value:
    if name.isdigit():
        return nat(int(name))
    raise KeyError(name)


class _FormulaParser:
    def __init__(self, text: str, constants: Optional[Mapping[str, Value]]):
        self.text = text
        self.constants = constants
        self.tokens = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _LEX.match(text, pos)
            if m is None or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.text))

    def _take(self, value=None, kind=None):
        tok = self._peek()
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value if value is not None else kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", self.text, tok[2])
        self.i += 1
        return tok

    def parse(self) -> Formula:
        phi = self.formula()
        tok = self._peek()
        if tok[0] != "eof":
            raise ParseError(f"trailing input {tok[1]!r}", self.text, tok[2])
        return phi

    def term(self) -> Term:
        kind, val, pos = self._peek()
        if kind == "var":
            self.i += 1
            return Var(int(val[1:]))
        if kind == "const":
            self.i += 1
            name = val[2:]
            try:
                if self.constants is not None and name in self.constants:
                    return Const(self.constants[name])
                return Const(_default_constant(name))
            except KeyError:
                raise ParseError(f"unknown constant name {name!r}", self.text, pos) from None
        raise ParseError(f"expected a term, found {val or 'end of input'!r}", self.text, pos)

    def formula(self) -> Formula:
        kind, val, pos = self._peek()
        if val == "!":
            self.i += 1
            return Not(self.formula())
        if kind == "kw" and val in "EA":
            self.i += 1
            v = int(self._take(kind="var")[1][1:])
            self._take(".")
            body = self.formula()
            return Exists(v, body) if val == "E" else Forall(v, body)
        if kind == "kw" and val == "U":
            self.i += 1
            self._take("(")
            t = self.term()
            self._take(")")
            return UAtom(t)
        if kind == "kw" and val == "R":
            self.i += 1
            self._take("(")
            t = self.term()
            self._take(",")
            s = self.term()
            self._take(")")
            return RAtom(t, s)
        if val == "(":
            self.i += 1
            left = self.formula()
            op = self._peek()
            if op[1] not in ("&", "|", "->"):
                raise ParseError(f"expected '&', '|' or '->', found {op[1] or 'end of input'!r}",
                                 self.text, op[2])
            self.i += 1
            right = self.formula()
            self._take(")")
            if op[1] == "&":
                return And(left, right)
            if op[1] == "|":
                return Or(left, right)
            return Implies(left, right)
        if kind in ("var", "const"):
            t = self.term()
            self._take("=")
            return Eq(t, self.term())
        raise ParseError(f"expected a formula, found {val or 'end of input'!r}", self.text, pos)


def parse_formula(text: str, constants: Optional[Mapping[str, Value]] = None) -> Formula:
    """Parse the text grammar.  ``c:name`` looks name up in ``constants``;
    all-digit names default to the von Neumann natural."""
    return _FormulaParser(text, constants).parse()


def format_term(t: Term, names: Optional[Mapping[Value, str]] = None) -> str:
    if isinstance(t, Var):
        return f"v{t.n}"
    if names is not None and t.a in names:
        return "c:" + names[t.a]
    n = as_nat(t.a)
    if n is not None:
        return f"c:{n}"
    raise FormulaError(f"no printable name for constant {format_hset(t.a)}")


def format_formula(phi: Formula, names: Optional[Mapping[Value, str]] = None) -> str:
    """Print in the core grammar (no sugar), so parsing gives back phi."""
    ft = lambda t: format_term(t, names)  # noqa: E731
    if isinstance(phi, Eq):
        return f"{ft(phi.left)}={ft(phi.right)}"
    if isinstance(phi, UAtom):
        return f"U({ft(phi.term)})"
    if isinstance(phi, RAtom):
        return f"R({ft(phi.left)},{ft(phi.right)})"
    if isinstance(phi, Not):
        return "!" + format_formula(phi.body, names)
    if isinstance(phi, And):
        return f"({format_formula(phi.left, names)} & {format_formula(phi.right, names)})"
    if isinstance(phi, Exists):
        return f"E v{phi.var}. {format_formula(phi.body, names)}"
    raise FormulaError(f"not a formula: {phi!r}")


# -- bounded enumeration ----------------------------------------------------

def atoms_over(L: Language, variables: Sequence[int]) -> list:
    """Atomic formulas whose variables come from ``variables``.

    Equations are listed once per unordered pair of terms (t=s and s=t have
    the same shape up to symmetry of identity).
    """
    terms = [Var(v) for v in variables] + [Const(a) for a in L.constants()]
    out = []
    for i, t in enumerate(terms):
        for s in terms[i:]:
            out.append(Eq(t, s))
    if "U" in L.predicates:
        out.extend(UAtom(t) for t in terms)
    if "R" in L.predicates:
        out.extend(RAtom(t, s) for t in terms for s in terms)
    return out


def _literal(phi: Formula, positive: bool) -> Formula:
    return phi if positive else Not(phi)


def _level_vars(var_bound: int, level: int) -> list:
    return list(range(max(var_bound - level, 0)))


def formula_basis(L: Language, qrank_: int, var_bound: int, over=None,
                  guard: int = DEFAULT_ENUM_GUARD) -> list:
    """Generators for rank-≤qrank formulas, level by level.

    Level j holds formulas of rank ≤ j whose free variables lie in
    v0..v(var_bound-j-1).  Level j+1 is: the atoms over the smaller variable
    set, plus ∃v C for the top variable v and every complete conjunction C of
    literals over level j.  Every formula of rank ≤ j with free variables in
    that range is a boolean combination of level-j generators.

    With ``over`` (a sequence of structures) formulas are identified when they
    have the same extension on every structure, and only realized complete
    conjunctions are kept; this is what makes rank 2 tractable.  Returns a
    list of levels, each a list of (formula, extension-or-None).
    """
    if qrank_ < 0 or var_bound < 0:
        raise ValueError("qrank and var_bound must be >= 0")
    space = None
    if over is not None:
        from .sat import PointSpace
        space = PointSpace(over, var_bound)
    levels = []
    count = 0

    def admit(level, phi, ext, seen):
        nonlocal count
        key = ext if space is not None else phi
        if key in seen:
            return
        seen[key] = None
        level.append((phi, ext))
        count += 1
        if count > guard:
            raise GuardExceeded("formula enumeration", guard, count)

    level, seen = [], {}
    for a in atoms_over(L, _level_vars(var_bound, 0)):
        admit(level, a, space.atom_extension(a) if space else None, seen)
    levels.append(level)
    for j in range(qrank_):
        top = var_bound - j - 1
        if top < 0:
            break
        prev = levels[-1]
        level, seen = [], {}
        for a in atoms_over(L, _level_vars(var_bound, j + 1)):
            admit(level, a, space.atom_extension(a) if space else None, seen)
        if space is None:
            if 2 ** len(prev) > guard:
                raise GuardExceeded("complete conjunctions", guard, 2 ** len(prev))
            for signs in itertools.product((True, False), repeat=len(prev)):
                if not prev:
                    break
                c = conj([_literal(p, s) for (p, _), s in zip(prev, signs)])
                admit(level, Exists(top, c), None, seen)
        else:
            for c, cext in _realized_conjunctions(prev, space):
                admit(level, Exists(top, c), space.exists(top, cext), seen)
        levels.append(level)
    return levels


def _realized_conjunctions(gens, space):
    """Blocks of the partition cut out by gens, each with its defining conjunction."""
    if not gens:
        return []
    blocks = {}
    for pt in range(space.size):
        bit = 1 << pt
        sig = tuple(bool(ext & bit) for _, ext in gens)
        blocks.setdefault(sig, 0)
        blocks[sig] |= bit
    out = []
    for sig, ext in blocks.items():
        c = conj([_literal(p, s) for (p, _), s in zip(gens, sig)])
        out.append((c, ext))
    return out


def enum_formulas(L: Language, qrank_: int, var_bound: int, *, over=None,
                  boolean_closure: bool = False,
                  guard: int = DEFAULT_ENUM_GUARD) -> Iterator[Formula]:
    """Stream every generator (see formula_basis), lowest level first.

    With ``boolean_closure`` the last level is replaced by all of its boolean
    combinations, one per truth table over the generators (as a DNF).
    """
    levels = formula_basis(L, qrank_, var_bound, over=over, guard=guard)
    if not boolean_closure:
        seen = set()
        for level in levels:
            for phi, ext in level:
                key = phi if over is None else ext
                if key not in seen:
                    seen.add(key)
                    yield phi
        return
    gens = [p for p, _ in levels[-1]]
    if not gens:
        return
    rows = list(itertools.product((True, False), repeat=len(gens)))
    if 2 ** len(rows) > guard:
        raise GuardExceeded("boolean closure", guard, 2 ** len(rows))
    minterms = [conj([_literal(g, s) for g, s in zip(gens, row)]) for row in rows]
    falsum = And(gens[0], Not(gens[0]))
    for table in itertools.product((False, True), repeat=len(rows)):
        chosen = [m for m, keep in zip(minterms, table) if keep]
        if not chosen:
            yield falsum
            continue
        acc = chosen[0]
        for m in chosen[1:]:
            acc = Or(acc, m)
        yield acc
