"""Hereditarily finite sets, optionally over urelement atoms.

Values are hash-consed: building the same set twice returns the same object,
so equality is identity and hashing is O(1).  Iteration order is canonical
(sorted by ``key``), which keeps every enumeration built on top deterministic.
"""
from __future__ import annotations

import itertools
import re
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence, Union

from .errors import ParseError

# Interning tables.  dict.setdefault is atomic under the GIL, so concurrent
# constructors always agree on a single representative.
_SETS: dict = {}
_ATOMS: dict = {}


class Atom:
    """An urelement.  Never equal to any set; has no elements."""

    __slots__ = ("name", "key", "__weakref__")
    is_atom = True
    rank = 0

    def __new__(cls, name: str):
        atom = _ATOMS.get(name)
        if atom is not None:
            return atom
        if not re.fullmatch(r"[A-Za-z0-9_]+", name):
            raise ValueError(f"bad atom name {name!r}")
        atom = object.__new__(cls)
        atom.name = name
        atom.key = (0, name)
        return _ATOMS.setdefault(name, atom)

    def __reduce__(self):
        return (Atom, (self.name,))

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        return f"Atom({self.name!r})"

    def __str__(self):
        return "#" + self.name


class HSet:
    """A canonical finite set whose elements are HSet or Atom values.

    Do not call the constructor directly; use :func:`canon` or :func:`hset`.
    """

    __slots__ = ("members", "elements", "key", "rank", "__weakref__")
    is_atom = False

    def __reduce__(self):
        return (canon, (tuple(self.elements),))

    def __iter__(self) -> Iterator["Value"]:
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return x in self.members

    def __bool__(self):
        return bool(self.elements)

    def __lt__(self, other):
        return self.key < other.key

    def __le__(self, other):
        return self is other or self.key < other.key

    def issubset(self, other: "HSet") -> bool:
        return self.members <= other.members

    def __repr__(self):
        return f"hset({format_hset(self)})"

    def __str__(self):
        return format_hset(self)


Value = Union[HSet, Atom]


def canon(items: Iterable[Value] = ()) -> HSet:
    """Return the canonical set with the given elements (duplicates collapse)."""
    members = frozenset(items)
    found = _SETS.get(members)
    if found is not None:
        return found
    for m in members:
        if not isinstance(m, (HSet, Atom)):
            raise TypeError(f"not an HSet value: {m!r}")
    s = object.__new__(HSet)
    s.members = members
    s.elements = tuple(sorted(members, key=lambda v: v.key))
    s.rank = 1 + max((m.rank for m in s.elements), default=-1)
    s.key = (1, s.rank, len(members), tuple(m.key for m in s.elements))
    return _SETS.setdefault(members, s)


def hset(*items: Value) -> HSet:
    return canon(items)


EMPTY = canon()


def is_set(x) -> bool:
    return isinstance(x, HSet)


def require_set(x, what="argument") -> HSet:
    if not isinstance(x, HSet):
        raise TypeError(f"{what} must be a set, got {x}")
    return x


def union(x: HSet) -> HSet:
    """The union of the set-elements of x (atoms contribute nothing)."""
    return canon(m for e in x if isinstance(e, HSet) for m in e)


def union2(x: HSet, y: HSet) -> HSet:
    return canon(itertools.chain(x, y))


def successor(x: HSet) -> HSet:
    return canon(itertools.chain(x, (x,)))


# -- pairs and products -----------------------------------------------------

def kpair(x: Value, y: Value) -> HSet:
    return hset(hset(x), hset(x, y))


_UNPAIR: dict = {}


def unpair(p) -> Optional[tuple]:
    """Inverse of kpair; None if p is not a Kuratowski pair."""
    try:
        return _UNPAIR[p]
    except KeyError:
        pass
    except TypeError:
        return None
    out = _unpair(p)
    _UNPAIR[p] = out
    return out


def _unpair(p) -> Optional[tuple]:
    if not isinstance(p, HSet) or not 1 <= len(p) <= 2:
        return None
    if any(not isinstance(e, HSet) for e in p):
        return None
    if len(p) == 1:
        (s,) = p.elements
        if len(s) != 1:
            return None
        (x,) = s.elements
        return (x, x)
    small, big = sorted(p.elements, key=len)
    if len(small) != 1 or len(big) != 2:
        return None
    (x,) = small.elements
    if x not in big:
        return None
    (y,) = [e for e in big if e is not x]
    return (x, y)


def first(p) -> Value:
    pr = unpair(p)
    if pr is None:
        raise ValueError(f"not a pair: {p}")
    return pr[0]


def second(p) -> Value:
    pr = unpair(p)
    if pr is None:
        raise ValueError(f"not a pair: {p}")
    return pr[1]


def cart(M: HSet, N: HSet) -> HSet:
    require_set(M, "left factor")
    require_set(N, "right factor")
    return canon(kpair(x, y) for x in M for y in N)


def tup(*xs: Value) -> Value:
    """Left-nested tuple: <x0,...,xn> = <<x0,...,x(n-1)>,xn>.

    The 1-tuple is its only component and the 0-tuple is the empty set.
    """
    if not xs:
        return EMPTY
    acc = xs[0]
    for x in xs[1:]:
        acc = kpair(acc, x)
    return acc


def untup(t, n: int) -> Optional[list]:
    if n == 0:
        return [] if t is EMPTY else None
    out = []
    for _ in range(n - 1):
        pr = unpair(t)
        if pr is None:
            return None
        t, last = pr
        out.append(last)
    out.append(t)
    out.reverse()
    return out


# -- ordinals and naturals --------------------------------------------------

def is_transitive(x) -> bool:
    if not isinstance(x, HSet):
        return False
    return all(isinstance(y, HSet) and y.members <= x.members for y in x)


def is_ord(x) -> bool:
    # linear ∈-trichotomy, not well-order
    if not is_transitive(x):
        return False
    for y in x:
        for z in x:
            if not (y in z or y is z or z in y):
                return False
    return True


def is_succ(x) -> bool:
    if not isinstance(x, HSet):
        return False
    return any(isinstance(y, HSet) and x is successor(y) for y in x)


def is_nat(x) -> bool:
    if not is_ord(x):
        return False
    return all(y is EMPTY or is_succ(y) for y in itertools.chain(x, (x,)))


@lru_cache(maxsize=None)
def nat(n: int) -> HSet:
    if n < 0:
        raise ValueError("naturals are non-negative")
    return EMPTY if n == 0 else successor(nat(n - 1))


def as_nat(x) -> Optional[int]:
    return len(x) if is_nat(x) else None


# -- the tuple space ⁿM -----------------------------------------------------

class TupleSpace:
    """All n-tuples <<0,x0>,...,<n-1,x(n-1)>> with each x_i in M.

    Codes are real HSet values; decoded coordinates are cached so that slot
    reads and slot replacement are dictionary lookups.
    """

    def __init__(self, n: int, M: HSet):
        require_set(M, "tuple-space domain")
        if n < 0:
            raise ValueError("slot count must be >= 0")
        self.n = n
        self.M = M
        labels = [nat(i) for i in range(n)]
        self._code = {}
        self._coords = {}
        for coords in itertools.product(M.elements, repeat=n):
            h = tup(*(kpair(lab, x) for lab, x in zip(labels, coords)))
            self._code[coords] = h
            self._coords[h] = coords
        self.elements = tuple(self._code.values())
        self.as_set = canon(self.elements)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, h):
        return h in self._coords

    def code(self, coords: Sequence[Value]) -> HSet:
        return self._code[tuple(coords)]

    def coords(self, h) -> tuple:
        c = self._coords.get(h)
        if c is None:
            c = decode_tuple(h, self.n)
            if c is None:
                raise ValueError(f"not an element of the {self.n}-tuple space")
        return c

    def read(self, h, i: int) -> Value:
        if not 0 <= i < self.n:
            raise IndexError(f"slot {i} out of range for {self.n}-tuples")
        return self.coords(h)[i]

    def replace(self, h, i: int, x: Value):
        """h(i/x): the tuple that agrees with h except slot i holds x."""
        if not 0 <= i < self.n:
            raise IndexError(f"slot {i} out of range for {self.n}-tuples")
        c = list(self.coords(h))
        c[i] = x
        return self.code(c)


def decode_tuple(h, n: int) -> Optional[tuple]:
    """Structural decode of an element of ⁿM, independent of any cache."""
    comps = untup(h, n)
    if comps is None:
        return None
    out = []
    for i, c in enumerate(comps):
        pr = unpair(c)
        if pr is None or pr[0] is not nat(i):
            return None
        out.append(pr[1])
    return tuple(out)


@lru_cache(maxsize=512)
def tuple_space(n: int, M: HSet) -> TupleSpace:
    return TupleSpace(n, M)


# -- literal syntax ---------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\{)|(\})|(,)|#([A-Za-z0-9_]+)|n:(\d+))")


class _LitParser:
    def __init__(self, text: str, pos: int = 0):
        self.text = text
        self.pos = pos

    def peek(self):
        m = _TOKEN.match(self.text, self.pos)
        return m

    def value(self) -> Value:
        m = self.peek()
        if m is None:
            raise ParseError("expected a set literal", self.text, self._skipws())
        self.pos = m.end()
        if m.group(1):
            items = []
            nxt = self.peek()
            if nxt is not None and nxt.group(2):
                self.pos = nxt.end()
                return EMPTY
            while True:
                items.append(self.value())
                nxt = self.peek()
                if nxt is None:
                    raise ParseError("expected ',' or '}'", self.text, self._skipws())
                self.pos = nxt.end()
                if nxt.group(2):
                    return canon(items)
                if not nxt.group(3):
                    raise ParseError("expected ',' or '}'", self.text, nxt.start())
        if m.group(4):
            return Atom(m.group(4))
        if m.group(5):
            return nat(int(m.group(5)))
        raise ParseError("unexpected token", self.text, m.start())

    def _skipws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.pos


def parse_hset_prefix(text: str, pos: int = 0):
    """Parse one literal starting at pos; return (value, end position)."""
    p = _LitParser(text, pos)
    v = p.value()
    return v, p.pos


def parse_hset(text: str) -> Value:
    p = _LitParser(text)
    v = p.value()
    if p._skipws() != len(text):
        raise ParseError("trailing input after literal", text, p.pos)
    return v


def format_hset(x: Value) -> str:
    if isinstance(x, Atom):
        return "#" + x.name
    if x is EMPTY:
        return "{}"
    n = as_nat(x)
    if n is not None:
        return f"n:{n}"
    return "{" + ",".join(format_hset(e) for e in x) + "}"
