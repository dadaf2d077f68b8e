"""The ℤ≀ℤ action on [0,1] and a direct check that f, g generate a free semigroup."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .pl import PLHomeo, as_fraction, invert


def wreath_pair(x0, contraction) -> tuple[PLHomeo, PLHomeo]:
    """f pushes every interior point down; g is a bump supported on [f(x0), x0]."""
    x0, c = as_fraction(x0), as_fraction(contraction)
    if not (0 < x0 < 1 and 0 < c < 1):
        raise ValueError("need 0 < x0 < 1 and 0 < contraction < 1")
    fx0 = c * x0
    f = PLHomeo([(0, 0), (x0, fx0), (1, 1)])
    mid = (fx0 + x0) / 2
    g = PLHomeo([(0, 0), (fx0, fx0), (mid, mid + (x0 - fx0) / 4), (x0, x0), (1, 1)])
    return f, g


def positive_words(max_len: int) -> list[str]:
    return ["".join(w) for L in range(1, max_len + 1) for w in product("fg", repeat=L)]


def eval_word(word: str, maps: dict, x):
    for ch in reversed(word):
        x = maps[ch](x)
    return x


def separation_interval(f: PLHomeo, g: PLHomeo, x0) -> tuple[Fraction, Fraction]:
    """[u, v] inside (f(x0), x0) with g([u, v]) disjoint from it."""
    x0 = as_fraction(x0)
    lo = f(x0)
    d = x0 - lo
    u = lo + d / 8
    v = (u + g(u)) / 2
    if not lo < u < v < g(u) < x0:
        raise ValueError("g does not push the chosen interval off itself")
    return u, v


def disjoint_levels(f: PLHomeo, g: PLHomeo, u, v, support_bottom, cap: int = 10_000) -> list[int]:
    """All m >= 0 with g f^m((u,v)) disjoint from f^m((u,v)).

    Once f^m(v) drops to the bottom of g's support, g is the identity on the
    image and every later m is a coincidence.
    """
    out = []
    a, b = u, v
    for m in range(cap):
        if b <= support_bottom:
            return out
        ga, gb = g(a), g(b)
        if gb <= a or ga >= b:
            out.append(m)
        a, b = f(a), f(b)
    raise RuntimeError("orbit of the test interval did not leave the support")


def _strip(w1: str, w2: str) -> tuple[str, str, str]:
    i = 0
    while i < min(len(w1), len(w2)) and w1[i] == w2[i]:
        i += 1
    a1, a2 = w1[i:], w2[i:]
    j = 0
    while j < min(len(a1), len(a2)) and a1[-1 - j] == a2[-1 - j]:
        j += 1
    suffix = a1[len(a1) - j:]
    return a1[:len(a1) - j], a2[:len(a2) - j], suffix


@dataclass
class SeparationReport:
    max_len: int
    words: int
    pairs: int
    failures: list
    test_point: Fraction
    m: int


def wreath_separation(f: PLHomeo, g: PLHomeo, x0, max_len: int = 6) -> SeparationReport:
    """Evaluate all pairs of distinct positive words at the test point f^m(u).

    Each pair W1 = A·X·B, W2 = A·Y·B is reduced to X, Y (which differ in their
    last letter); X and Y are compared at t = f^m(u), and W1, W2 at B⁻¹(t).
    """
    x0 = as_fraction(x0)
    u, v = separation_interval(f, g, x0)
    levels = disjoint_levels(f, g, u, v, support_bottom=f(x0))
    if not levels:
        raise ValueError("no disjoint level: the criterion does not apply")
    m = max(levels)
    t = u
    for _ in range(m):
        t = f(t)
    maps = {"f": f, "g": g}
    inv = {"f": invert(f), "g": invert(g)}
    words = positive_words(max_len)
    failures = []
    pairs = 0
    for i, w1 in enumerate(words):
        for w2 in words[i + 1:]:
            pairs += 1
            x1, x2, suffix = _strip(w1, w2)
            if eval_word(x1, maps, t) == eval_word(x2, maps, t):
                failures.append((w1, w2))
                continue
            s = t
            for ch in suffix:
                s = inv[ch](s)
            if eval_word(w1, maps, s) == eval_word(w2, maps, s):
                failures.append((w1, w2))
    return SeparationReport(max_len, len(words), pairs, failures, t, m)
