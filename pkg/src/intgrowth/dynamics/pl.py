"""Exact piecewise-linear homeomorphisms with rational knots."""
from __future__ import annotations

from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, Sequence


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("use exact rationals (int, Fraction or 'p/q' strings), not floats")
    return Fraction(x)


def fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class PLHomeo:
    """Increasing PL map through the knots (xs[i], ys[i]).

    With ``line=False`` the map is a homeomorphism [xs[0], xs[-1]] → [ys[0], ys[-1]].
    With ``line=True`` it is a homeomorphism of ℝ, extended affinely past the
    outer knots with the slopes of the outer segments.  Knots are canonical:
    collinear interior knots are dropped, and an affine line map keeps only its
    values at 0 and 1.
    """

    __slots__ = ("xs", "ys", "line")

    def __init__(self, knots: Iterable[Sequence], line: bool = False):
        pts = [(as_fraction(x), as_fraction(y)) for x, y in knots]
        if len(pts) < 2:
            raise ValueError("need at least two knots")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if not (x1 > x0 and y1 > y0):
                raise ValueError("knots must be strictly increasing in both coordinates")
        keep = [pts[0]]
        for i in range(1, len(pts) - 1):
            (xa, ya), (xb, yb), (xc, yc) = keep[-1], pts[i], pts[i + 1]
            if (yb - ya) * (xc - xb) != (yc - yb) * (xb - xa):
                keep.append(pts[i])
        keep.append(pts[-1])
        if line and len(keep) == 2:
            (xa, ya), (xb, yb) = keep
            s = (yb - ya) / (xb - xa)
            b = ya - s * xa
            keep = [(Fraction(0), b), (Fraction(1), b + s)]
        self.xs = tuple(p[0] for p in keep)
        self.ys = tuple(p[1] for p in keep)
        self.line = line

    # construction helpers ----------------------------------------------

    @classmethod
    def identity(cls, lo=0, hi=1) -> PLHomeo:
        return cls([(lo, lo), (hi, hi)])

    @classmethod
    def line_identity(cls) -> PLHomeo:
        return cls([(0, 0), (1, 1)], line=True)

    @classmethod
    def translation(cls, t) -> PLHomeo:
        t = as_fraction(t)
        return cls([(0, t), (1, 1 + t)], line=True)

    @property
    def knots(self):
        return list(zip(self.xs, self.ys))

    @property
    def domain(self):
        return (None, None) if self.line else (self.xs[0], self.xs[-1])

    def __eq__(self, other):
        return isinstance(other, PLHomeo) and (self.xs, self.ys, self.line) == (other.xs, other.ys, other.line)

    def __hash__(self):
        return hash((self.xs, self.ys, self.line))

    def __repr__(self):
        kn = ", ".join(f"{fmt(x)}->{fmt(y)}" for x, y in self.knots)
        return f"PLHomeo([{kn}]{', line' if self.line else ''})"

    def is_identity(self) -> bool:
        return all(x == y for x, y in self.knots)

    # evaluation --------------------------------------------------------

    def _segment(self, xs, x):
        i = bisect_right(xs, x) - 1
        return min(max(i, 0), len(xs) - 2)

    def __call__(self, x):
        x = as_fraction(x)
        if not self.line and not self.xs[0] <= x <= self.xs[-1]:
            raise ValueError(f"{x} outside the domain [{self.xs[0]}, {self.xs[-1]}]")
        i = self._segment(self.xs, x)
        x0, x1, y0, y1 = self.xs[i], self.xs[i + 1], self.ys[i], self.ys[i + 1]
        return y0 + (y1 - y0) * (x - x0) / (x1 - x0)

    def inverse_at(self, y):
        return invert(self)(y)

    def slope_at(self, x, side: str = "right") -> Fraction:
        x = as_fraction(x)
        i = self._segment(self.xs, x)
        if side == "left" and x == self.xs[i] and i > 0:
            i -= 1
        return (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])

    def __mul__(self, other: PLHomeo) -> PLHomeo:
        return compose(self, other)

    def __pow__(self, k: int) -> PLHomeo:
        return power(self, k)

    # io ----------------------------------------------------------------

    def to_tsv(self) -> str:
        head = "# line\n" if self.line else ""
        return head + "".join(f"{fmt(x)}\t{fmt(y)}\n" for x, y in self.knots)

    @classmethod
    def from_tsv(cls, text: str) -> PLHomeo:
        line = False
        knots = []
        for raw in text.splitlines():
            s = raw.strip()
            if not s:
                continue
            if s.startswith("#"):
                line = line or s.lstrip("#").strip() == "line"
                continue
            parts = s.split("\t")
            if len(parts) != 2:
                raise ValueError(f"expected two tab-separated rationals, got {raw!r}")
            try:
                knots.append((Fraction(parts[0].strip()), Fraction(parts[1].strip())))
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"bad rational in {raw!r}") from exc
        return cls(knots, line=line)


def compose(f: PLHomeo, g: PLHomeo) -> PLHomeo:
    """f∘g (g first)."""
    if f.line != g.line:
        raise ValueError("cannot compose a line map with an interval map")
    if not f.line and (g.ys[0], g.ys[-1]) != (f.xs[0], f.xs[-1]):
        raise ValueError("range of g must equal the domain of f")
    ginv = invert(g)
    xs = set(g.xs)
    for x in f.xs:
        if f.line or g.ys[0] <= x <= g.ys[-1]:
            xs.add(ginv(x))
    xs = sorted(xs)
    return PLHomeo([(x, f(g(x))) for x in xs], line=f.line)


def invert(f: PLHomeo) -> PLHomeo:
    return PLHomeo([(y, x) for x, y in f.knots], line=f.line)


def power(f: PLHomeo, k: int) -> PLHomeo:
    if k < 0:
        return power(invert(f), -k)
    lo, hi = (f.xs[0], f.xs[-1]) if not f.line else (0, 1)
    if not f.line and (f.ys[0], f.ys[-1]) != (lo, hi):
        if k == 1:
            return f
        raise ValueError("powers need a self-map")
    out = PLHomeo.line_identity() if f.line else PLHomeo.identity(lo, hi)
    base = f
    while k:
        if k & 1:
            out = compose(out, base)
        base = compose(base, base)
        k >>= 1
    return out


def reflect(f: PLHomeo) -> PLHomeo:
    """Conjugate by x ↦ -x."""
    return PLHomeo([(-x, -y) for x, y in reversed(f.knots)], line=f.line)


def fixed_intervals(f: PLHomeo) -> list[tuple]:
    """Exact fixed set as sorted maximal closed pieces (lo, hi); lo == hi for
    isolated points, None for an unbounded end of a line map."""
    pieces = []

    def add(lo, hi):
        if pieces:
            plo, phi = pieces[-1]
            if phi is not None and lo is not None and lo <= phi:
                pieces[-1] = (plo, hi if hi is None or hi > phi else phi)
                return
        pieces.append((lo, hi))

    segs = list(zip(zip(f.xs, f.ys), zip(f.xs[1:], f.ys[1:])))
    if f.line:
        (x0, y0), (x1, y1) = segs[0]
        s = (y1 - y0) / (x1 - x0)
        if s == 1 and y0 == x0:
            add(None, x0)
        elif s != 1:
            x = (y0 - s * x0) / (1 - s)
            if x < x0:
                add(x, x)
    for (x0, y0), (x1, y1) in segs:
        d0, d1 = y0 - x0, y1 - x1
        if d0 == 0 and d1 == 0:
            add(x0, x1)
        elif d0 == 0:
            add(x0, x0)
        elif d1 == 0:
            add(x1, x1)
        elif (d0 < 0) != (d1 < 0):
            x = x0 + (x1 - x0) * d0 / (d0 - d1)
            add(x, x)
    if f.line:
        (x0, y0), (x1, y1) = segs[-1]
        s = (y1 - y0) / (x1 - x0)
        if s == 1 and y1 == x1:
            add(x1, None)
        elif s != 1:
            x = (y1 - s * x1) / (1 - s)
            if x > x1:
                add(x, x)
    return pieces


def fixed_points_in(f: PLHomeo, lo, hi) -> list[tuple]:
    """Fixed pieces meeting the open interval (lo, hi)."""
    out = []
    for a, b in fixed_intervals(f):
        if (b is None or b > lo) and (a is None or a < hi):
            out.append((a, b))
    return out
