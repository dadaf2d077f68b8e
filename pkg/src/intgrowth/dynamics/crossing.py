"""Crossed pairs of interval homeomorphisms and positive ping-pong certificates."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..group_core import CapExceeded
from .pl import PLHomeo, compose, fixed_intervals, fixed_points_in, fmt, invert, power, reflect


@dataclass(frozen=True)
class CrossWitness:
    u: Fraction
    v: Fraction
    fixer: str  # "f" or "g"
    mover: str
    side: str  # "left": mover(u) ∈ (u,v); "right": mover(v) ∈ (u,v)

    def to_json(self):
        return {"u": fmt(self.u), "v": fmt(self.v), "fixer": self.fixer, "mover": self.mover, "side": self.side}


def gaps(f: PLHomeo) -> list[tuple[Fraction, Fraction]]:
    """Bounded maximal open intervals free of fixed points, left to right."""
    pieces = fixed_intervals(f)
    out = []
    for (_, hi), (lo, _) in zip(pieces, pieces[1:]):
        if hi is not None and lo is not None and hi < lo:
            out.append((hi, lo))
    return out


def detect_crossed(f: PLHomeo, g: PLHomeo) -> CrossWitness | None:
    maps = {"f": f, "g": g}
    for fixer, mover in (("f", "g"), ("g", "f")):
        h = maps[mover]
        for u, v in gaps(maps[fixer]):
            if u < h(u) < v:
                return CrossWitness(u, v, fixer, mover, "left")
            if u < h(v) < v:
                return CrossWitness(u, v, fixer, mover, "right")
    return None


@dataclass
class PingPongCert:
    """F = fixer^(±m) and G = mover∘fixer^(±n) map X = [lo, hi] into disjoint subintervals."""

    m: int
    n: int
    fixer_sign: int
    F: PLHomeo
    G: PLHomeo
    X: tuple[Fraction, Fraction]
    FX: tuple[Fraction, Fraction]
    GX: tuple[Fraction, Fraction]
    witness: CrossWitness

    def to_json(self):
        return {
            "m": self.m, "n": self.n, "fixer_sign": self.fixer_sign,
            "X": [fmt(x) for x in self.X], "FX": [fmt(x) for x in self.FX], "GX": [fmt(x) for x in self.GX],
            "F": [[fmt(x), fmt(y)] for x, y in self.F.knots],
            "G": [[fmt(x), fmt(y)] for x, y in self.G.knots],
            "witness": self.witness.to_json(),
        }


def _validate(f: PLHomeo, g: PLHomeo, w: CrossWitness):
    maps = {"f": f, "g": g}
    if {w.fixer, w.mover} != {"f", "g"} or w.side not in ("left", "right"):
        raise ValueError("witness must name distinct maps f, g and a side")
    fixer, mover = maps[w.fixer], maps[w.mover]
    if not w.u < w.v or fixer(w.u) != w.u or fixer(w.v) != w.v:
        raise ValueError("witness invalid: fixer does not fix both endpoints")
    if fixed_points_in(fixer, w.u, w.v):
        raise ValueError("witness invalid: fixer has a fixed point inside (u, v)")
    end = w.u if w.side == "left" else w.v
    if not w.u < mover(end) < w.v:
        raise ValueError("witness invalid: mover does not send the endpoint inside")
    return fixer, mover


def image_interval(h: PLHomeo, X):
    return (h(X[0]), h(X[1]))


def verify_certificate(cert: PingPongCert) -> bool:
    """Re-apply F and G to X and check the positive ping-pong inclusions."""
    lo, hi = cert.X
    FX = image_interval(cert.F, cert.X)
    GX = image_interval(cert.G, cert.X)
    if FX != cert.FX or GX != cert.GX:
        return False
    inside = lambda I: lo <= I[0] < I[1] <= hi
    disjoint = FX[1] < GX[0] or GX[1] < FX[0]
    return lo < hi and inside(FX) and inside(GX) and disjoint


def pingpong_certificate(f: PLHomeo, g: PLHomeo, w: CrossWitness, cap: int = 10_000) -> PingPongCert:
    fixer, mover = _validate(f, g, w)
    u, v = w.u, w.v
    if w.side == "right":
        # mirror so that the mover pushes the left endpoint inside
        fixer_r, mover_r = reflect(fixer), reflect(mover)
        u, v = -v, -u
    else:
        fixer_r, mover_r = fixer, mover
    mid = (u + v) / 2
    sign = 1 if fixer_r(mid) < mid else -1
    a = fixer_r if sign == 1 else invert(fixer_r)
    w_pt = mover_r(u)
    z1 = (w_pt + v) / 2
    # least n with (mover a^n)(z1) < z1
    n, y = 0, z1
    while True:
        n += 1
        if n > cap:
            raise CapExceeded(f"no n <= {cap} with the composite below z'", partial={"n": n - 1, "point": y})
        y = a(y)
        if mover_r(y) < z1:
            break
    h = compose(mover_r, power(a, n))
    fixed = [p for p in fixed_points_in(h, u, v)]
    z = min(p[0] for p in fixed if p[0] is not None and p[0] > u)
    m, y = 0, z
    while y >= w_pt:
        m += 1
        if m > cap:
            raise CapExceeded(f"no m <= {cap} with a^m(z) < w", partial={"n": n, "m": m - 1})
        y = a(y)
    F = power(a, m)
    G = h
    X = (u, z)
    if w.side == "right":
        F, G = reflect(F), reflect(G)
        X = (-z, -u)
    cert = PingPongCert(m, n, sign, F, G, X, image_interval(F, X), image_interval(G, X), w)
    if not verify_certificate(cert):
        raise RuntimeError("constructed certificate failed its own re-check")
    return cert
