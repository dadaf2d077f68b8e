"""Exact arithmetic in the automaton groups G (binary tree) and H (tree of
countable degree, acting on integer sequences).

Elements are stored as *portraits*: a truncated tree whose root carries an
offset on the first coordinate and whose two children are the sections
selected by the parity of that coordinate.  Portraits are hash-consed, so two
portraits of the same element of the level-n quotient are the same object.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

GROUPS = ("H", "G")
LETTERS = "abcd"


class CapExceeded(Exception):
    """A configured search cap was reached before an answer was found."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True, order=True)
class SignedGenerator:
    letter: str
    inverse: bool = False

    def __post_init__(self):
        if self.letter not in LETTERS:
            raise ValueError(f"unknown generator {self.letter!r}")

    def inv(self) -> SignedGenerator:
        return SignedGenerator(self.letter, not self.inverse)

    def __str__(self):
        return self.letter.upper() if self.inverse else self.letter


SIGNED_GENERATORS = tuple(SignedGenerator(x, s) for x in LETTERS for s in (False, True))


@dataclass(frozen=True)
class Word:
    """Free word over the signed generators; the rightmost letter acts first."""

    letters: tuple[SignedGenerator, ...] = ()
    group: str = "H"

    def __post_init__(self):
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}, got {self.group!r}")

    @classmethod
    def parse(cls, text: str, group: str = "H") -> Word:
        text = text.strip()
        if text in ("", "1", "e", "id"):
            return cls((), group)
        letters = []
        for ch in text:
            if ch.lower() not in LETTERS:
                raise ValueError(f"bad letter {ch!r} in word {text!r}")
            letters.append(SignedGenerator(ch.lower(), ch.isupper()))
        return cls(tuple(letters), group)

    def __str__(self):
        return "".join(map(str, self.letters))

    def __len__(self):
        return len(self.letters)

    def __mul__(self, other: Word) -> Word:
        if self.group != other.group:
            raise ValueError("cannot multiply words from different groups")
        return Word(self.letters + other.letters, self.group)

    def __pow__(self, k: int) -> Word:
        if k < 0:
            return self.inverse() ** (-k)
        return Word(self.letters * k, self.group)

    def inverse(self) -> Word:
        return Word(tuple(g.inv() for g in reversed(self.letters)), self.group)


def commutator(x: Word, y: Word) -> Word:
    return x * y * x.inverse() * y.inverse()


def random_word(rng: random.Random, length: int, group: str = "H") -> Word:
    return Word(tuple(rng.choice(SIGNED_GENERATORS) for _ in range(length)), group)


# ---------------------------------------------------------------------------
# Portraits


class Portrait:
    """Canonical form of an element of the level-``depth`` quotient.

    Instances are interned: construct them through :meth:`leaf` and
    :meth:`node` (or the group operations below), never by mutation.
    """

    __slots__ = ("group", "offset", "even", "odd", "depth", "_hash")
    _table: dict = {}

    def __new__(cls, group, offset=0, even=None, odd=None):
        if even is None:
            if odd is not None or offset != 0:
                raise ValueError("depth-0 portrait is the trivial leaf")
            key = (group,)
        else:
            if even.depth != odd.depth or even.group != group or odd.group != group:
                raise ValueError("children must share group and depth")
            if group == "G":
                offset %= 2
            key = (group, offset, id(even), id(odd))
        hit = cls._table.get(key)
        if hit is not None:
            return hit
        self = object.__new__(cls)
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "even", even)
        object.__setattr__(self, "odd", odd)
        object.__setattr__(self, "depth", 0 if even is None else even.depth + 1)
        object.__setattr__(self, "_hash", hash((group, offset, hash(even), hash(odd))))
        # setdefault keeps one canonical instance if two threads race here
        return cls._table.setdefault(key, self)

    def __setattr__(self, name, value):
        raise AttributeError("Portrait is immutable")

    def __reduce__(self):
        return (Portrait, (self.group, self.offset, self.even, self.odd))

    @classmethod
    def leaf(cls, group: str = "H") -> Portrait:
        return cls(group)

    @classmethod
    def node(cls, offset: int, even: Portrait, odd: Portrait) -> Portrait:
        return cls(even.group, offset, even, odd)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Portrait) or self._hash != other._hash:
            return False
        return (self.group, self.offset, self.depth) == (other.group, other.offset, other.depth) and (
            self.depth == 0 or (self.even == other.even and self.odd == other.odd)
        )

    def child(self, r: int) -> Portrait:
        return self.even if r % 2 == 0 else self.odd

    def is_identity(self) -> bool:
        return self is identity(self.depth, self.group)

    def __repr__(self):
        if self.depth == 0:
            return "leaf"
        if self.even.depth == 0:
            return f"node({self.offset})"
        return f"node({self.offset}; {self.even!r}, {self.odd!r})"

    def to_json(self):
        if self.depth == 0:
            return None
        return {"m": self.offset, "e": self.even.to_json(), "o": self.odd.to_json()}

    @classmethod
    def from_json(cls, data, depth: int, group: str = "H") -> Portrait:
        if depth == 0:
            if data is not None:
                raise ValueError("depth-0 portrait must be null")
            return cls.leaf(group)
        if not isinstance(data, dict) or set(data) != {"m", "e", "o"}:
            raise ValueError("portrait node must have exactly the keys m, e, o")
        if not isinstance(data["m"], int) or isinstance(data["m"], bool):
            raise ValueError("portrait offset must be an integer")
        return cls(group, data["m"], cls.from_json(data["e"], depth - 1, group), cls.from_json(data["o"], depth - 1, group))


_identity_cache: dict = {}
_generator_cache: dict = {}
_compose_cache: dict = {}
_invert_cache: dict = {}


def identity(n: int, group: str = "H") -> Portrait:
    key = (n, group)
    p = _identity_cache.get(key)
    if p is None:
        p = Portrait.leaf(group)
        for _ in range(n):
            p = Portrait(group, 0, p, p)
        _identity_cache[key] = p
    return p


# sections of b, c, d: (even child, odd child)
_SECTIONS = {"b": ("a", "c"), "c": ("a", "d"), "d": (None, "b")}


def _letter_portrait(letter: str, n: int, group: str) -> Portrait:
    key = (letter, n, group)
    p = _generator_cache.get(key)
    if p is not None:
        return p
    if n == 0:
        p = Portrait.leaf(group)
    elif letter == "a":
        p = Portrait(group, 1, identity(n - 1, group), identity(n - 1, group))
    else:
        even, odd = _SECTIONS[letter]
        kids = [identity(n - 1, group) if s is None else _letter_portrait(s, n - 1, group) for s in (even, odd)]
        p = Portrait(group, 0, *kids)
    _generator_cache[key] = p
    return p


def generator_portrait(g: SignedGenerator, n: int, group: str = "H") -> Portrait:
    if n < 0:
        raise ValueError("depth must be non-negative")
    p = _letter_portrait(g.letter, n, group)
    return invert(p) if g.inverse else p


def compose(p: Portrait, q: Portrait) -> Portrait:
    """Return p∘q (q acts first)."""
    if p.depth != q.depth:
        raise ValueError(f"depth mismatch: {p.depth} vs {q.depth}")
    if p.group != q.group:
        raise ValueError("group mismatch")
    return _compose(p, q)


def _compose(p, q):
    if p.depth == 0:
        return p
    if q is identity(q.depth, q.group):
        return p
    if p is identity(p.depth, p.group):
        return q
    key = (id(p), id(q))
    hit = _compose_cache.get(key)
    if hit is not None:
        return hit
    s = q.offset
    r = Portrait(p.group, p.offset + s, _compose(p.child(s), q.even), _compose(p.child(s + 1), q.odd))
    _compose_cache[key] = r
    return r


def invert(p: Portrait) -> Portrait:
    if p.depth == 0:
        return p
    hit = _invert_cache.get(id(p))
    if hit is not None:
        return hit
    m = p.offset
    r = Portrait(p.group, -m, invert(p.child(m)), invert(p.child(m + 1)))
    _invert_cache[id(p)] = r
    return r


def power(p: Portrait, k: int) -> Portrait:
    if k < 0:
        return power(invert(p), -k)
    result, base = identity(p.depth, p.group), p
    while k:
        if k & 1:
            result = compose(result, base)
        base = compose(base, base)
        k >>= 1
    return result


def word_to_portrait(w: Word, n: int) -> Portrait:
    p = identity(n, w.group)
    for g in w.letters:
        p = compose(p, generator_portrait(g, n, w.group))
    return p


def clear_caches():
    """Drop memo tables.  Existing portraits stay valid (equality is structural)."""
    _compose_cache.clear()
    _invert_cache.clear()


# ---------------------------------------------------------------------------
# Actions on finite prefixes


def act_prefix(x, s: Sequence[int]) -> tuple[int, ...]:
    """Image of the prefix ``s`` under a Portrait (or a Word, via direct recursion)."""
    if isinstance(x, Word):
        return word_act_prefix(x, s)
    if len(s) > x.depth:
        raise ValueError(f"prefix of length {len(s)} exceeds portrait depth {x.depth}")
    out = []
    node = x
    mod2 = x.group == "G"
    for l in s:
        y = l + node.offset
        out.append(y % 2 if mod2 else y)
        node = node.child(l)
    return tuple(out)


def _letter_act(letter: str, inverse: bool, s: tuple, group: str) -> tuple:
    # literal recursive definitions of a, b, c, d (and their inverses)
    if not s:
        return s
    l1, rest = s[0], s[1:]
    if letter == "a":
        if group == "G":
            return ((1 - l1),) + rest
        return (l1 - 1 if inverse else l1 + 1,) + rest
    if letter == "b":
        sub = "a" if l1 % 2 == 0 else "c"
    elif letter == "c":
        sub = "a" if l1 % 2 == 0 else "d"
    else:
        if l1 % 2 == 0:
            return s
        sub = "b"
    return (l1,) + _letter_act(sub, inverse, rest, group)


def word_act_prefix(w: Word, s: Sequence[int]) -> tuple[int, ...]:
    s = tuple(s)
    if w.group == "G" and any(l not in (0, 1) for l in s):
        raise ValueError("G acts on binary sequences")
    for g in reversed(w.letters):
        s = _letter_act(g.letter, g.inverse, s, w.group)
    return s


def equal_at_level(w1: Word, w2: Word, n: int) -> bool:
    if w1.group != w2.group:
        raise ValueError("words come from different groups")
    return word_to_portrait(w1, n) is word_to_portrait(w2, n)


# ---------------------------------------------------------------------------
# Growth


@dataclass(frozen=True)
class GrowthTable:
    group: str
    level: int
    counts: tuple[int, ...]
    generators: tuple[SignedGenerator, ...] = field(default=SIGNED_GENERATORS, compare=False)

    @property
    def r_max(self) -> int:
        return len(self.counts) - 1

    def rows(self):
        return [(self.level, r, c) for r, c in enumerate(self.counts)]


def _expand(chunk, gens):
    return [compose(x, g) for x in chunk for g in gens]


def ball_sizes(group: str, n: int, r_max: int, cap: int | None = None,
               generators: Iterable[SignedGenerator] | None = None, threads: int = 1) -> GrowthTable:
    """Ball sizes |B(r)|, r = 0..r_max, in the level-n quotient.

    Raises CapExceeded (carrying the partial table) once more than ``cap``
    distinct elements have been seen.
    """
    if n < 1 or r_max < 0:
        raise ValueError("need n >= 1 and r_max >= 0")
    gens_signed = tuple(generators) if generators is not None else SIGNED_GENERATORS
    gens = [generator_portrait(g, n, group) for g in gens_signed]
    e = identity(n, group)
    seen = {e}
    frontier = [e]
    counts = [1]
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for _ in range(r_max):
            if pool is not None and len(frontier) > 256:
                size = -(-len(frontier) // threads)
                chunks = [frontier[i:i + size] for i in range(0, len(frontier), size)]
                candidates = [y for part in pool.map(_expand, chunks, [gens] * len(chunks)) for y in part]
            else:
                candidates = _expand(frontier, gens)
            new = []
            for y in candidates:
                if y not in seen:
                    seen.add(y)
                    new.append(y)
            counts.append(len(seen))
            frontier = new
            if cap is not None and len(seen) > cap:
                raise CapExceeded(f"ball exceeded {cap} elements at radius {len(counts) - 1}",
                                  partial=GrowthTable(group, n, tuple(counts), gens_signed))
    finally:
        if pool is not None:
            pool.shutdown()
    return GrowthTable(group, n, tuple(counts), gens_signed)


def growth_tower(group: str, levels: Iterable[int], r_max: int, **kw) -> list[GrowthTable]:
    return [ball_sizes(group, n, r_max, **kw) for n in levels]


def stabilized_counts(tables: Sequence[GrowthTable]) -> tuple[int, ...] | None:
    """Counts of the deepest level if it agrees with the one above, else None."""
    if len(tables) < 2:
        return None
    return tables[-1].counts if tables[-1].counts == tables[-2].counts else None


def order_at_level(w: Word, n: int, cap: int = 1 << 20) -> int:
    """Least t >= 1 with w^t trivial in the level-n quotient.

    Squares w until it dies at some 2^K; the order then divides 2^K but not
    2^(K-1), so it equals 2^K.  Quotients of G are 2-groups and non-trivial
    elements of quotients of H have infinite order, so no other case arises.
    """
    p = word_to_portrait(w, n)
    t = 1
    while t <= cap:
        if p.is_identity():
            return t
        p = compose(p, p)
        t *= 2
    raise CapExceeded(f"no power of two up to {cap} kills {w}")


