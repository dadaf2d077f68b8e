"""Interval diffeomorphisms realizing the level quotients of H.

A point of the ambient interval is stored hierarchically: the piece that
contains it (a depth-n leaf I_P, a gap J_P of depth < n, or one of the
countably many accumulation points a_P) plus its offset from the piece's left
end.  This keeps every piece resolvable even when it is far smaller than the
spacing of binary64 numbers near its absolute position.

A word w acts piecewise: the piece with index P goes to the piece with index
w·P (the tree action on the prefix) through the equivariant map between the
two lengths.  Gaps of depth j use the action on the first j coordinates.
"""
from __future__ import annotations

import functools
import math
import random
from dataclasses import dataclass, field, asdict
from typing import Iterable

import numpy as np

from . import group_core as gc
from .geometry import (EquivariantFamily, GeometryParams, IntervalSystem, ModulusOfContinuity,
                       sigma_eval)
from .summation import EPS

LEAF, GAP, RESIDUAL = "I_leaf", "J_gap", "residual"


@dataclass(frozen=True)
class PieceLocator:
    kind: str
    index: tuple[int, ...]


@dataclass(frozen=True)
class Point:
    """A point of the ambient interval.

    For a leaf the offset is measured from a_P, for a gap from c_P.  Residual
    points are a_P (marker "a") or the right end of the ambient interval
    (marker "b", empty index); their offset is 0.
    """

    kind: str
    index: tuple[int, ...]
    offset: float = 0.0
    marker: str = "a"

    @property
    def locator(self) -> PieceLocator:
        return PieceLocator(self.kind, self.index)

    def order_key(self):
        head = tuple((0, l) for l in self.index)
        if self.kind == LEAF:
            return head + ((2, self.offset),)
        if self.kind == GAP:
            return head + ((1, self.offset),)
        if self.marker == "b":
            return ((3, 0.0),)
        return head + ((-1, 0.0),)


@dataclass(frozen=True)
class ActionConfig:
    family: EquivariantFamily
    geometry: GeometryParams
    depth: int
    normalization: str = "none"  # none | rescale_to_unit

    def __post_init__(self):
        if self.depth < 1 or self.depth > self.geometry.n_max:
            raise ValueError(f"depth must lie in 1..{self.geometry.n_max}")
        if self.normalization not in ("none", "rescale_to_unit"):
            raise ValueError("normalization must be none or rescale_to_unit")


class Certified(tuple):
    """(value, err) pair with additive arithmetic."""

    def __new__(cls, value, err=0.0):
        return super().__new__(cls, (float(value), float(err)))

    value = property(lambda self: self[0])
    err = property(lambda self: self[1])

    def __add__(self, other):
        v = self[0] + other[0]
        return Certified(v, self[1] + other[1] + EPS * abs(v))

    def __sub__(self, other):
        v = self[0] - other[0]
        return Certified(v, self[1] + other[1] + EPS * (abs(self[0]) + abs(other[0])))


_DIRECT_RANGE = 4096


class Action:
    """Evaluator bound to one configuration (interval system built once)."""

    def __init__(self, cfg: ActionConfig):
        self.cfg = cfg
        self.sys = IntervalSystem(cfg.geometry)
        self.n = cfg.depth
        self.family = cfg.family
        self.scale = self.sys.T if cfg.normalization == "rescale_to_unit" else 1.0
        self._word_cache: dict = {}

    # pieces -------------------------------------------------------------

    def piece_length(self, kind: str, index) -> float:
        if kind == LEAF:
            return self.sys.len_I(index)
        if kind == GAP:
            return self.sys.len_J(index).value
        raise ValueError("residual points have no piece")

    def _has_gap(self, P) -> bool:
        return len(P) > 0 and self.sys.has_gaps(len(P))

    def _lenJ(self, P) -> Certified:
        if not self._has_gap(P):
            return Certified(0.0, 0.0)
        J = self.sys.len_J(P)
        return Certified(J.value, J.err)

    def _sum_left(self, P, l) -> Certified:
        """Σ_{m<l} |I_{P,m}|."""
        c = self.sys.child_offset(P, l)
        return Certified(c.value, c.err)

    def _sum_right(self, P, l) -> Certified:
        """Σ_{m≥l} |I_{P,m}|."""
        if l >= 1:
            t = self.sys._tail_from(P, l)
            return Certified(t.value, t.err)
        cs = self.sys.child_sum(P)
        return Certified(cs.value, cs.err) - self._sum_left(P, l)

    def _range_sum(self, P, lo, hi) -> Certified:
        """Σ_{lo≤m≤hi} |I_{P,m}|."""
        if hi < lo:
            return Certified(0.0, 0.0)
        if hi - lo <= _DIRECT_RANGE:
            vals = [self.sys.len_I(P + (m,)) for m in range(lo, hi + 1)]
            v = math.fsum(vals)
            return Certified(v, 4 * EPS * v)
        return self._sum_left(P, hi + 1) - self._sum_left(P, lo)

    # points -------------------------------------------------------------

    def check_point(self, p: Point):
        if p.kind == LEAF:
            if len(p.index) != self.n:
                raise ValueError("leaf index must have the configured depth")
            if not 0 <= p.offset <= self.sys.len_I(p.index):
                raise ValueError("offset outside the leaf")
        elif p.kind == GAP:
            if not 1 <= len(p.index) < self.n:
                raise ValueError("gap index depth must lie in 1..n-1")
            if not 0 <= p.offset <= self.sys.len_J(p.index).value:
                raise ValueError("offset outside the gap")
        elif p.kind == RESIDUAL:
            if p.marker == "b" and p.index:
                raise ValueError("right-end marker only at the ambient level")
            if len(p.index) >= self.n:
                raise ValueError("residual points a_P need |P| < n")
        else:
            raise ValueError(f"unknown point kind {p.kind!r}")

    def dist_left(self, p: Point, d: int = 0) -> Certified:
        """Distance from a_{P[:d]} to p."""
        P = p.index
        out = Certified(0.0)
        for i in range(d, len(P)):
            out = out + self._sum_left(P[:i], P[i])
        if p.kind == LEAF:
            return out + Certified(p.offset)
        if p.kind == GAP:
            cs = self.sys.child_sum(P)
            return out + Certified(cs.value, cs.err) + Certified(p.offset)
        if p.marker == "b":
            return Certified(self.sys.T, self.sys.T_err)
        return out

    def dist_right(self, p: Point, d: int = 0) -> Certified:
        """Distance from p to b_{P[:d]}."""
        P = p.index
        if p.kind == LEAF:
            out = Certified(self.sys.len_I(P) - p.offset)
        elif p.kind == GAP:
            out = Certified(self.sys.len_J(P).value - p.offset, self.sys.len_J(P).err)
        elif p.marker == "b":
            return Certified(0.0)
        else:
            out = Certified(self.sys.len_I(P), 0.0) if P else Certified(self.sys.T, self.sys.T_err)
        for i in range(len(P) - 1, d - 1, -1):
            A = P[:i]
            out = out + self._sum_right(A, P[i] + 1) + self._lenJ(A)
        return out

    def distance(self, p: Point, q: Point) -> Certified:
        """|x_p - x_q| from positive sums only (no cancellation of absolute positions)."""
        if p.order_key() > q.order_key():
            p, q = q, p
        if q.kind == RESIDUAL and q.marker == "b":
            r = self.dist_right(p, 0)
            return Certified(r.value / self.scale, r.err / self.scale)
        P, Q = p.index, q.index
        d = 0
        while d < len(P) and d < len(Q) and P[d] == Q[d]:
            d += 1
        A = P[:d]
        p_term, q_term = len(P) == d, len(Q) == d
        if p_term and q_term:
            if p.kind == RESIDUAL or q.kind == RESIDUAL:
                out = Certified(0.0) if p.kind == q.kind else self.dist_left(q, d)
            else:
                out = Certified(abs(q.offset - p.offset))
        elif p_term:
            # p is a_A (left of all of I_A); a gap or leaf at A would sit to the right
            out = self.dist_left(q, d)
        elif q_term:
            # q is J_A (right of the children); p lives in child P[d]
            out = self.dist_right(p, d + 1) + self._sum_right(A, P[d] + 1) + Certified(q.offset)
        else:
            out = self.dist_right(p, d + 1) + self._range_sum(A, P[d] + 1, Q[d] - 1) + self.dist_left(q, d + 1)
        return Certified(out.value / self.scale, out.err / self.scale)

    def to_float(self, p: Point) -> float:
        return self.dist_left(p, 0).value / self.scale

    def locate(self, x: float) -> Point:
        """Descend the nested system to find the piece containing x.

        Half-open convention: a boundary belongs to the piece on its right.
        A point that the error bounds cannot separate from a boundary is snapped
        to it.
        """
        y = x * self.scale
        T = self.sys.T
        slack = lambda v: self.sys.T_err + 8 * EPS * abs(y) + 8 * EPS * abs(v)
        if y < -slack(0) or y > T + slack(T):
            raise ValueError(f"x={x} outside the ambient interval")
        if abs(y - T) <= slack(T):
            return Point(RESIDUAL, (), 0.0, "b")
        P: tuple = ()
        rel = y
        err = self.sys.T_err
        while True:
            if len(P) == self.n:
                L = self.sys.len_I(P)
                return Point(LEAF, P, min(max(rel, 0.0), L))
            tol = err + 8 * EPS * abs(y)
            if rel <= tol:
                return Point(RESIDUAL, P, 0.0, "a")
            if P:
                cs = self.sys.child_sum(P)
                if abs(rel - cs.value) <= tol + cs.err:
                    return Point(GAP, P, 0.0)
                if rel > cs.value:
                    J = self.sys.len_J(P).value
                    return Point(GAP, P, min(rel - cs.value, J))
            l = self._find_child(P, rel)
            left = self._sum_left(P, l)
            right = self._sum_left(P, l + 1)
            if abs(rel - right.value) <= tol + right.err:
                l, left = l + 1, right
            P = P + (l,)
            rel = rel - left.value
            err = err + left.err + EPS * abs(left.value)

    def _find_child(self, P, rel: float) -> int:
        f = lambda l: self._sum_left(P, l).value
        lo, hi = -1, 1
        while f(lo) > rel:
            lo *= 2
        while f(hi) <= rel:
            hi *= 2
            if hi > 1 << 62:
                raise ValueError("point lies beyond the children (in the gap)")
        # invariant f(lo) <= rel < f(hi)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if f(mid) <= rel:
                lo = mid
            else:
                hi = mid
        return lo

    # action -------------------------------------------------------------

    def word_portrait(self, w: gc.Word) -> gc.Portrait:
        key = (w.letters, w.group)
        p = self._word_cache.get(key)
        if p is None:
            if w.group != "H":
                raise ValueError("the interval action realizes H")
            p = self._word_cache[key] = gc.word_to_portrait(w, self.n)
        return p

    def _step(self, portrait: gc.Portrait, p: Point):
        """Image point and derivative of the map whose tree action is ``portrait``."""
        if p.kind == RESIDUAL:
            if p.marker == "b":
                return p, 1.0
            return Point(RESIDUAL, gc.act_prefix(portrait, p.index), 0.0, "a"), 1.0
        target = gc.act_prefix(portrait, p.index)
        u = self.piece_length(p.kind, p.index)
        if target == p.index:
            return p, 1.0
        v = self.piece_length(p.kind, target)
        value, deriv = self.family(u, v, min(p.offset, u))
        return Point(p.kind, target, value), deriv

    def apply(self, w: gc.Word, p: Point) -> Point:
        return self._step(self.word_portrait(w), p)[0]

    def derivative(self, w: gc.Word, p: Point) -> float:
        if p.kind == RESIDUAL:
            raise ValueError("derivative is undefined on the residual set")
        total = 1.0
        for g in reversed(w.letters):
            p, dv = self._step(gc.generator_portrait(g, self.n, "H"), p)
            total *= dv
        return total

    def jet(self, w: gc.Word, p: Point):
        q = self.apply(w, p)
        return q, self.derivative(w, p)


@functools.lru_cache(maxsize=32)
def _action_for(cfg: ActionConfig) -> Action:
    return Action(cfg)


def locate(cfg: ActionConfig, x: float) -> PieceLocator:
    return _action_for(cfg).locate(x).locator


def _as_word(w) -> gc.Word:
    return gc.Word.parse(w, "H") if isinstance(w, str) else w


def eval_action(cfg: ActionConfig, w, x):
    """Image of x (float or Point) under the word w."""
    act = _action_for(cfg)
    w = _as_word(w)
    if isinstance(x, Point):
        return act.apply(w, x)
    return act.to_float(act.apply(w, act.locate(x)))


def derivative_action(cfg: ActionConfig, w, x) -> float:
    act = _action_for(cfg)
    w = _as_word(w)
    p = x if isinstance(x, Point) else act.locate(x)
    return act.derivative(w, p)


# ---------------------------------------------------------------------------
# Sampling


def random_index(rng: random.Random, depth: int, big: float = 0.25, big_max: float = 1e6) -> tuple[int, ...]:
    out = []
    for _ in range(depth):
        if rng.random() < big:
            out.append(rng.choice((-1, 1)) * int(math.exp(rng.uniform(0, math.log(big_max)))))
        else:
            out.append(rng.randint(-4, 4))
    return tuple(out)


def random_point(act: Action, rng: random.Random, big: float = 0.25) -> Point:
    j = rng.randint(1, act.n)
    kind = LEAF if j == act.n else GAP
    idx = random_index(rng, j, big)
    if rng.random() < 0.02 and j < act.n:
        return Point(RESIDUAL, idx[:-1], 0.0, "a")
    L = act.piece_length(kind, idx)
    return Point(kind, idx, rng.random() * L)


def _grid_fractions(m: int) -> np.ndarray:
    uni = np.linspace(0.0, 1.0, m)
    logs = np.logspace(-9, -1, 9)
    return np.unique(np.concatenate([uni, logs, 1 - logs, [0.5, 0.25, 0.75]]))


def _within_piece_ratio(family, u, v, scale, modulus, fractions) -> float:
    """Max |f'(x)-f'(y)| / σ(|x-y|) over grid pairs inside one piece."""
    if u == v:
        return 0.0
    xs = fractions * u
    d = np.array([family(u, v, min(x, u))[1] for x in xs])
    dx = np.abs(xs[:, None] - xs[None, :]) / scale
    df = np.abs(d[:, None] - d[None, :])
    mask = dx > 0
    sig = _sigma_array(modulus, dx[mask])
    return float(np.max(df[mask] / sig)) if mask.any() else 0.0


def _sigma_array(m: ModulusOfContinuity, s: np.ndarray) -> np.ndarray:
    if m.kind == "holder":
        return s ** m.param
    if m.kind == "navas_log":
        with np.errstate(divide="ignore"):
            return np.where(s <= 1 / math.e, 1.0 / -np.log(np.minimum(s, 1 / math.e)), math.e * s)
    e1 = 1 + m.param
    cut = math.exp(-e1)
    return np.where(s <= cut, s * (-np.log(np.minimum(s, cut))) ** e1, e1 ** e1 * s)


def sample_pieces(act: Action, rng: random.Random, per_level: int = 40) -> list[tuple[str, tuple]]:
    """Small-index pieces at every depth plus random ones with large indices."""
    pieces = []
    for j in range(1, act.n + 1):
        kind = LEAF if j == act.n else GAP
        small = sorted({random_index(rng, j, big=0.0) for _ in range(per_level)})
        if j == 1:
            small = [(l,) for l in range(-6, 7)]
        large = sorted({random_index(rng, j, big=0.6) for _ in range(per_level // 2)})
        pieces += [(kind, idx) for idx in small + large]
    return pieces


GENERATORS = ("a", "b", "c", "d")


def sampled_norm(act: Action, w: gc.Word, modulus: ModulusOfContinuity, rng: random.Random,
                 per_level: int = 40, grid: int = 33, cross_pairs: int = 400) -> tuple[float, int]:
    """Sampled σ-norm of (w)' : a lower bound for the true norm.

    Distances are enlarged by their certified error, which can only lower
    each sampled ratio.
    """
    portrait = act.word_portrait(w)
    fr = _grid_fractions(grid)
    best = 0.0
    count = 0
    probes = []
    for kind, idx in sample_pieces(act, rng, per_level):
        u = act.piece_length(kind, idx)
        tgt = gc.act_prefix(portrait, idx)
        v = act.piece_length(kind, tgt)
        best = max(best, _within_piece_ratio(act.family, u, v, act.scale, modulus, fr))
        count += len(fr) ** 2
        for t in (0.5, 0.2, 0.8):
            p = Point(kind, idx, t * u)
            probes.append((p, act.derivative(w, p)))
        # neighbours at the same depth, the piece's right-hand gap and the leaf at its left end
        sib = idx[:-1] + (idx[-1] + 1,)
        us = act.piece_length(kind, sib)
        for t in (0.5, 0.02):
            p = Point(kind, sib, t * us)
            probes.append((p, act.derivative(w, p)))
    pairs = []
    for i in range(len(probes)):
        # a probe and its sibling probes are adjacent in the list
        for j in range(i + 1, min(i + 6, len(probes))):
            pairs.append((i, j))
    for _ in range(cross_pairs):
        pairs.append(tuple(rng.sample(range(len(probes)), 2)))
    for i, j in pairs:
        (p, fp), (q, fq) = probes[i], probes[j]
        if fp == fq:
            continue
        d = act.distance(p, q)
        if d.value <= 0:
            continue
        best = max(best, abs(fp - fq) / sigma_eval(modulus, d.value + d.err))
        count += 1
    return best, count


# ---------------------------------------------------------------------------
# Verification suite


CHECKS = ("homomorphism", "tangency", "sigma_norm", "holder_diag", "cagoncito")


@dataclass
class VerifyReport:
    depth: int
    checks: list
    samples: dict = field(default_factory=dict)
    homomorphism_residual: float | None = None
    tangency_deviation: float | None = None
    sigma_norm: dict | None = None
    holder_constant: dict | None = None
    cagoncito_violations: int | None = None
    cagoncito_checked: int | None = None
    passed: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def _random_word(rng, max_len=6) -> gc.Word:
    return gc.random_word(rng, rng.randint(1, max_len), "H")


def homomorphism_residual(act: Action, rng: random.Random, samples: int) -> float:
    worst = 0.0
    for _ in range(samples):
        w1, w2 = _random_word(rng), _random_word(rng)
        p = random_point(act, rng)
        lhs = act.apply(w1 * w2, p)
        rhs = act.apply(w1, act.apply(w2, p))
        if lhs.locator != rhs.locator:
            return math.inf
        worst = max(worst, abs(lhs.offset - rhs.offset) / act.scale)
    return worst


def tangency_deviation(act: Action, rng: random.Random, samples: int, eta: float = 1e-9) -> float:
    worst = 0.0
    for i in range(samples):
        g = gc.Word.parse(GENERATORS[i % 4])
        p = random_point(act, rng)
        if p.kind == RESIDUAL:
            continue
        L = act.piece_length(p.kind, p.index)
        for t in (eta, 1 - eta):
            worst = max(worst, abs(act.derivative(g, Point(p.kind, p.index, t * L)) - 1))
    return worst


def cagoncito_check(act: Action, w: gc.Word, rng: random.Random, alpha: float, grid: int = 65):
    """Displacement bound on pieces fixed by w; returns (violations, checked).

    The Hölder constant of w' is estimated on the same piece, including the
    pairs with the fixed endpoints where the derivative is 1.
    """
    portrait = act.word_portrait(w)
    modulus = ModulusOfContinuity.holder(alpha)
    candidates = [()] + [(l,) for l in range(-5, 6)]
    candidates += [random_index(rng, j) for j in range(1, act.n + 1) for _ in range(5)]
    violations = checked = 0
    for Q in candidates:
        if gc.act_prefix(portrait, Q) != tuple(Q):
            continue
        # points inside I_Q at the configured depth
        pts = []
        for _ in range(grid):
            ext = Q + random_index(rng, act.n - len(Q), big=0.1)
            L = act.sys.len_I(ext)
            for t in (0.5, 0.25, 0.75):
                pts.append(Point(LEAF, ext, t * L))
        left = Point(RESIDUAL, Q, 0.0, "a") if len(Q) < act.n else Point(LEAF, Q, 0.0)
        derivs = [act.derivative(w, p) for p in pts]
        M_est = 0.0
        for p, fp in zip(pts, derivs):
            d = act.distance(left, p)
            if d.value > 0:
                M_est = max(M_est, abs(fp - 1) / sigma_eval(modulus, d.value + d.err))
        for i in range(len(pts)):
            for j in range(i + 1, min(i + 4, len(pts))):
                d = act.distance(pts[i], pts[j])
                if d.value > 0 and derivs[i] != derivs[j]:
                    M_est = max(M_est, abs(derivs[i] - derivs[j]) / sigma_eval(modulus, d.value + d.err))
        width = (act.sys.len_I(Q) if Q else act.sys.T) / act.scale
        bound = M_est * width ** (1 + alpha)
        for p in pts:
            disp = act.distance(p, act.apply(w, p))
            checked += 1
            if disp.value - disp.err > bound * (1 + 1e-9):
                violations += 1
    return violations, checked


def verify_suite(cfg: ActionConfig, checks: Iterable[str] = CHECKS, samples: int = 1000,
                 tolerances: dict | None = None, seed: int = 0, M: float = 1.0, alpha: float = 0.5,
                 modulus: ModulusOfContinuity | None = None) -> VerifyReport:
    checks = list(checks)
    bad = set(checks) - set(CHECKS)
    if bad:
        raise ValueError(f"unknown checks {sorted(bad)}")
    tol = {"homomorphism": 1e-9, "tangency": 1e-6}
    tol.update(tolerances or {})
    act = _action_for(cfg)
    rng = random.Random(seed)
    rep = VerifyReport(depth=cfg.depth, checks=checks)
    if "homomorphism" in checks:
        rep.homomorphism_residual = homomorphism_residual(act, rng, samples)
        rep.samples["homomorphism"] = samples
        rep.passed["homomorphism"] = rep.homomorphism_residual <= tol["homomorphism"]
    if "tangency" in checks:
        rep.tangency_deviation = tangency_deviation(act, rng, samples)
        rep.samples["tangency"] = 2 * samples
        rep.passed["tangency"] = rep.tangency_deviation <= tol["tangency"]
    if "sigma_norm" in checks:
        mod = modulus or ModulusOfContinuity.navas_log()
        rep.sigma_norm = {}
        n_pairs = 0
        for g in GENERATORS:
            val, cnt = sampled_norm(act, gc.Word.parse(g), mod, rng)
            rep.sigma_norm[g] = val
            n_pairs += cnt
        rep.samples["sigma_norm"] = n_pairs
        rep.passed["sigma_norm"] = max(rep.sigma_norm.values()) <= M
    if "holder_diag" in checks:
        mod = ModulusOfContinuity.holder(alpha)
        rep.holder_constant = {}
        n_pairs = 0
        for g in GENERATORS:
            val, cnt = sampled_norm(act, gc.Word.parse(g), mod, rng)
            rep.holder_constant[g] = val
            n_pairs += cnt
        rep.samples["holder_diag"] = n_pairs
    if "cagoncito" in checks:
        v = c = 0
        for g in GENERATORS:
            dv, dc = cagoncito_check(act, gc.Word.parse(g), rng, alpha)
            v += dv
            c += dc
        rep.cagoncito_violations, rep.cagoncito_checked = v, c
        rep.samples["cagoncito"] = c
        rep.passed["cagoncito"] = v == 0
    return rep


def plot_rows(cfg: ActionConfig, w, resolution: int) -> list[tuple[float, float, float]]:
    """(x, f(x), f'(x)) on a uniform grid of the (normalized) ambient interval."""
    act = _action_for(cfg)
    w = _as_word(w)
    top = act.sys.T / act.scale
    rows = []
    for i in range(resolution + 1):
        x = top * i / resolution
        p = act.locate(x)
        q = act.apply(w, p)
        d = 1.0 if p.kind == RESIDUAL else act.derivative(w, p)
        rows.append((x, act.to_float(q), d))
    return rows
