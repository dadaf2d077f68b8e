"""Moduli of continuity, equivariant families of interval maps, the nested
interval systems used by the embedding, and the planner for the sequence k_n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .summation import EPS, power_tail

# ---------------------------------------------------------------------------
# Moduli of continuity


@dataclass(frozen=True)
class ModulusOfContinuity:
    kind: str  # holder | navas_log | log_eps
    param: float = 0.0  # α for holder, ε for log_eps

    def __post_init__(self):
        if self.kind == "holder":
            if not 0 < self.param <= 1:
                raise ValueError("holder exponent must lie in (0, 1]")
        elif self.kind == "log_eps":
            if self.param <= 0:
                raise ValueError("log_eps needs ε > 0")
        elif self.kind != "navas_log":
            raise ValueError(f"unknown modulus {self.kind!r}")

    @classmethod
    def holder(cls, alpha: float) -> ModulusOfContinuity:
        return cls("holder", alpha)

    @classmethod
    def navas_log(cls) -> ModulusOfContinuity:
        return cls("navas_log")

    @classmethod
    def log_eps(cls, eps: float) -> ModulusOfContinuity:
        return cls("log_eps", eps)

    def __call__(self, s: float) -> float:
        return sigma_eval(self, s)


def sigma_eval(m: ModulusOfContinuity, s: float) -> float:
    if not s > 0:
        raise ValueError("modulus is evaluated at positive distances only")
    if m.kind == "holder":
        return s ** m.param
    if m.kind == "navas_log":
        return 1.0 / -math.log(s) if s <= 1 / math.e else math.e * s
    # log_eps: s log(1/s)^(1+ε) up to where s ↦ σ(s)/s stops decreasing, linear beyond
    e1 = 1 + m.param
    cut = math.exp(-e1)
    if s <= cut:
        return s * (-math.log(s)) ** e1
    return e1 ** e1 * s


# ---------------------------------------------------------------------------
# Equivariant families


def _yoccoz(u: float, v: float, x: float) -> tuple[float, float, float]:
    """Value, first and second derivative of φ_v ∘ φ_u⁻¹ at x ∈ [0, u]."""
    if x <= 0:
        return 0.0, 1.0, 0.0
    if x >= u:
        return v, 1.0, 0.0
    r = v / u
    q = 1.0 / (r * r)
    t = x / u
    k = math.pi / u
    if t < 0.25:
        s = math.tan(math.pi * t)
        den = 1 + q * s * s
        return (v / math.pi) * math.atan(s / r), (1 + s * s) / den, -k * 2 * (q - 1) * s * (1 + s * s) / (den * den)
    if t > 0.75:
        s = math.tan(math.pi * ((u - x) / u))
        den = 1 + q * s * s
        return v - (v / math.pi) * math.atan(s / r), (1 + s * s) / den, k * 2 * (q - 1) * s * (1 + s * s) / (den * den)
    tau = math.tan(math.pi * (t - 0.5))
    den = tau * tau + q
    return (v / 2 + (v / math.pi) * math.atan(r * tau), (1 + tau * tau) / den,
            k * 2 * tau * (q - 1) * (tau * tau + 1) / (den * den))


@dataclass(frozen=True)
class EquivariantFamily:
    kind: str = "yoccoz"  # yoccoz | affine

    def __post_init__(self):
        if self.kind not in ("yoccoz", "affine"):
            raise ValueError(f"unknown family {self.kind!r}")

    def jet(self, u: float, v: float, x: float) -> tuple[float, float, float]:
        if not (u > 0 and v > 0):
            raise ValueError("interval lengths must be positive")
        if x < 0 or x > u:
            raise ValueError(f"x={x} outside [0, {u}]")
        if self.kind == "affine":
            return v * x / u, v / u, 0.0
        if u == v:
            return x, 1.0, 0.0
        return _yoccoz(u, v, x)

    def __call__(self, u, v, x):
        value, deriv, _ = self.jet(u, v, x)
        return value, deriv

    def second(self, u: float, v: float, x: float) -> float:
        return self.jet(u, v, x)[2]


def phi_eval(f: EquivariantFamily, u: float, v: float, x: float) -> tuple[float, float]:
    return f(u, v, x)


def yoccoz_phi(u: float, y: float) -> float:
    """φ_u : ℝ → (0, u)."""
    return u / 2 + (u / math.pi) * math.atan(u * y)


def yoccoz_phi_inv(u: float, x: float) -> float:
    return math.tan(math.pi * (x / u - 0.5)) / u


# ---------------------------------------------------------------------------
# Geometry parameters and interval systems


@dataclass(frozen=True)
class GeometryParams:
    variant: str  # navas | affine
    k: tuple[int, ...] = ()
    n_max: int = 0
    ratio: Fraction | None = None
    tol: float = 1e-12

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.variant == "navas":
            if not self.k:
                raise ValueError("navas variant needs a k sequence")
            if any(not isinstance(x, int) or isinstance(x, bool) for x in self.k):
                raise ValueError("k entries must be integers")
            if self.k[0] < 4:
                raise ValueError("k_1 must be at least 4")
            if any(b <= a for a, b in zip(self.k, self.k[1:])):
                raise ValueError("k must be strictly increasing")
            n = self.n_max or len(self.k)
            if not 1 <= n <= len(self.k):
                raise ValueError("n_max must lie in 1..len(k)")
            object.__setattr__(self, "n_max", n)
        elif self.variant == "affine":
            r = Fraction(self.ratio) if self.ratio is not None else None
            if r is None or not 0 < r < 1:
                raise ValueError("affine ratio must lie strictly between 0 and 1")
            object.__setattr__(self, "ratio", r)
            if self.n_max < 0:
                raise ValueError("n_max must be non-negative")
            if self.n_max == 0:
                object.__setattr__(self, "n_max", 64)
        else:
            raise ValueError(f"unknown geometry variant {self.variant!r}")

    @classmethod
    def navas(cls, k: Sequence[int], n_max: int | None = None, tol: float = 1e-12) -> GeometryParams:
        return cls("navas", tuple(k), n_max or len(k), None, tol)

    @classmethod
    def affine(cls, ratio, n_max: int = 64, tol: float = 1e-12) -> GeometryParams:
        return cls("affine", (), n_max, Fraction(ratio), tol)

    def to_json(self) -> dict:
        if self.variant == "navas":
            return {"variant": "navas", "k": list(self.k), "n_max": self.n_max, "tol": self.tol}
        return {"variant": "affine", "ratio": f"{self.ratio.numerator}/{self.ratio.denominator}", "tol": self.tol}

    @classmethod
    def from_json(cls, data: dict) -> GeometryParams:
        if not isinstance(data, dict):
            raise ValueError("geometry config must be a JSON object")
        variant = data.get("variant")
        tol = float(data.get("tol", 1e-12))
        if variant == "navas":
            extra = set(data) - {"variant", "k", "n_max", "tol"}
            if extra:
                raise ValueError(f"unknown keys {sorted(extra)}")
            k = data.get("k")
            if not isinstance(k, list) or not k:
                raise ValueError("navas config needs a non-empty list k")
            return cls("navas", tuple(k), int(data.get("n_max", len(k))), None, tol)
        if variant == "affine":
            extra = set(data) - {"variant", "ratio", "n_max", "tol"}
            if extra:
                raise ValueError(f"unknown keys {sorted(extra)}")
            if "ratio" not in data:
                raise ValueError("affine config needs a ratio")
            try:
                ratio = Fraction(str(data["ratio"]))
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"bad ratio {data['ratio']!r}") from exc
            return cls("affine", (), int(data.get("n_max", 64)), ratio, tol)
        raise ValueError(f"unknown geometry variant {variant!r}")


@dataclass(frozen=True)
class Certified:
    value: float
    err: float


def _check_idx(idx):
    if not isinstance(idx, tuple):
        idx = tuple(idx)
    return idx


class IntervalSystem:
    """The nested family of intervals I_P ⊃ J_P indexed by integer paths P.

    I_P splits, left to right, into the children I_{P,l} (l ∈ ℤ, accumulating
    at the left end a_P and at c_P) followed by the gap J_P = [c_P, b_P].
    The ambient interval I_() = [0, T] has no gap.

    Lengths are kept relative to the parent so that pieces far below binary64
    resolution of absolute positions are still represented accurately.
    """

    def __init__(self, params: GeometryParams):
        self.params = params
        self._child_sum: dict = {}
        if params.variant == "navas":
            k1 = params.k[0]
            tail, err = power_tail(k1, 2, 1)
            self.T = float(k1) ** -2 + 2 * tail
            self.T_err = 2 * err + 2 * EPS * self.T
        else:
            r = params.ratio
            self._c = (1 - r) / (1 + r)
            self.T = 1.0
            self.T_err = 0.0

    @property
    def variant(self):
        return self.params.variant

    def max_depth_I(self) -> int:
        return self.params.n_max

    def has_gaps(self, depth: int) -> bool:
        """Whether J_P is defined (and non-trivial) for paths of this depth."""
        if self.variant == "affine":
            return False
        return 1 <= depth < len(self.params.k)

    # lengths ---------------------------------------------------------------

    def len_I_exact(self, idx) -> Fraction:
        idx = _check_idx(idx)
        n = len(idx)
        if n == 0:
            if self.variant == "affine":
                return Fraction(1)
            raise ValueError("ambient length of the navas system is irrational; use T")
        if n > self.params.n_max:
            raise ValueError(f"depth {n} exceeds n_max={self.params.n_max}")
        if self.variant == "navas":
            return Fraction(1, (sum(map(abs, idx)) + self.params.k[n - 1]) ** (2 * n))
        r, out = self.params.ratio, Fraction(1)
        for l in idx:
            out *= self._c * r ** abs(l)
        return out

    def len_I(self, idx) -> float:
        idx = _check_idx(idx)
        n = len(idx)
        if n == 0:
            return self.T
        if n > self.params.n_max:
            raise ValueError(f"depth {n} exceeds n_max={self.params.n_max}")
        if self.variant == "navas":
            return float(sum(map(abs, idx)) + self.params.k[n - 1]) ** (-2 * n)
        r = float(self.params.ratio)
        c = float(self._c)
        return math.prod(c * r ** abs(l) for l in idx)

    def child_sum(self, idx) -> Certified:
        """Σ_l |I_{P,l}| with a certified absolute error bound."""
        idx = _check_idx(idx)
        n = len(idx)
        if n == 0:
            return Certified(self.T, self.T_err)
        if self.variant == "affine":
            return Certified(self.len_I(idx), 4 * EPS * self.len_I(idx))
        if n >= len(self.params.k):
            raise ValueError(f"children of depth {n + 1} need k_{n + 1}")
        S = sum(map(abs, idx))
        key = (n, S)
        hit = self._child_sum.get(key)
        if hit is None:
            base = S + self.params.k[n]
            p = 2 * n + 2
            tail, err = power_tail(base, p, 1)
            val = float(base) ** -p + 2 * tail
            hit = Certified(val, 2 * err + 2 * EPS * val)
            self._child_sum[key] = hit
        return hit

    def len_J(self, idx) -> Certified:
        idx = _check_idx(idx)
        if len(idx) == 0:
            return Certified(0.0, 0.0)
        if self.variant == "affine":
            return Certified(0.0, 0.0)
        lenI = self.len_I(idx)
        cs = self.child_sum(idx)
        val = lenI - cs.value
        return Certified(val, cs.err + 2 * EPS * lenI)

    def _tail_from(self, idx, m0: int) -> Certified:
        # Σ_{m ≥ m0} |I_{P,±m}| for one sign
        n = len(idx)
        if self.variant == "affine":
            r = self.params.ratio
            val = float(self._c * r ** m0 / (1 - r)) * (self.len_I(idx) if n else 1.0)
            return Certified(val, 4 * EPS * val)
        S = sum(map(abs, idx))
        base = S + self.params.k[n]
        tail, err = power_tail(base, 2 * n + 2, m0)
        return Certified(tail, err)

    def child_offset(self, idx, l: int) -> Certified:
        """a_{P,l} - a_P."""
        idx = _check_idx(idx)
        if self.variant == "affine" and len(idx) >= self.params.n_max:
            raise ValueError("depth exceeds n_max")
        if l <= 0:
            return self._tail_from(idx, -l + 1)
        cs = self.child_sum(idx)
        t = self._tail_from(idx, l)
        return Certified(cs.value - t.value, cs.err + t.err + 2 * EPS * cs.value)

    def child_offset_exact(self, idx, l: int) -> Fraction:
        """a_{P,l} - a_P exactly (affine variant only)."""
        if self.variant != "affine":
            raise ValueError("exact offsets exist only for the affine variant")
        idx = _check_idx(idx)
        r = self.params.ratio
        scale = self.len_I_exact(idx)
        if l <= 0:
            return scale * self._c * r ** (-l + 1) / (1 - r)
        return scale * (1 - self._c * r ** l / (1 - r))

    def endpoint(self, idx) -> tuple[float, float, float, float]:
        """(a, b, c, err) in absolute coordinates of [0, T]."""
        idx = _check_idx(idx)
        a, err = 0.0, 0.0
        for i, l in enumerate(idx):
            off = self.child_offset(idx[:i], l)
            a += off.value
            err += off.err + EPS * abs(a)
        lenI = self.len_I(idx) if idx else self.T
        if not idx:
            err = self.T_err
        b = a + lenI
        if idx and self.has_gaps(len(idx)):
            J = self.len_J(idx)
            c = b - J.value
            err_c = err + J.err + EPS * abs(b)
        else:
            c = b
            err_c = err
        return a, b, c, max(err + EPS * abs(b), err_c)

    def endpoint_exact(self, idx) -> tuple[Fraction, Fraction]:
        """(a, b) exactly (affine variant only)."""
        idx = _check_idx(idx)
        a = Fraction(0)
        for i, l in enumerate(idx):
            a += self.child_offset_exact(idx[:i], l)
        return a, a + self.len_I_exact(idx)

    def dump_rows(self, indices):
        for idx in indices:
            a, b, c, err = self.endpoint(idx)
            lenI = b - a if idx else self.T
            lenJ = self.len_J(idx).value if idx and self.has_gaps(len(idx)) else 0.0
            yield (idx, a, b, c, lenI, lenJ, err)


def interval_length(sys: IntervalSystem, idx) -> tuple[float, float]:
    idx = _check_idx(idx)
    if not 1 <= len(idx) <= sys.params.n_max:
        raise ValueError("depth out of range")
    lenJ = sys.len_J(idx).value if sys.has_gaps(len(idx)) or sys.variant == "affine" else None
    if lenJ is None:
        raise ValueError(f"|J| at depth {len(idx)} needs k_{len(idx) + 1}")
    return sys.len_I(idx), lenJ


def endpoint(sys: IntervalSystem, idx) -> tuple[float, float, float, float]:
    return sys.endpoint(idx)


def dump_tsv(sys: IntervalSystem, indices) -> str:
    lines = ["idx\ta\tb\tc\tlenI\tlenJ\terr"]
    for idx, a, b, c, lenI, lenJ, err in sys.dump_rows(indices):
        lines.append("\t".join([",".join(map(str, idx)), *(repr(float(x)) for x in (a, b, c, lenI, lenJ, err))]))
    return "\n".join(lines) + "\n"


def gap_ratio_holds(sys: IntervalSystem, idx) -> bool:
    """|I| >= |J| >= (1 - 2/((2n+1)(S+k_n)))|I|, certified against the error bound."""
    n = len(idx)
    S = sum(map(abs, idx))
    lenI = sys.len_I(idx)
    J = sys.len_J(idx)
    lower = (1 - 2 / ((2 * n + 1) * (S + sys.params.k[n - 1]))) * lenI
    return J.value + J.err <= lenI * (1 + 4 * EPS) and J.value - J.err >= lower * (1 - 4 * EPS)


# ---------------------------------------------------------------------------
# Planner for k_n


def _check(name, lhs, rhs, sense):
    ok = lhs <= rhs if sense == "<=" else lhs >= rhs
    return {"condition": name, "lhs": lhs, "rhs": rhs, "sense": sense, "ok": bool(ok)}


def kn_conditions(n: int, k: int, M: float) -> list[dict]:
    """Evaluate the four inequalities constraining k_n (two ratio bounds, the
    log bound and the σ-norm budget)."""
    m = 2 * n + 1
    frac = -math.log1p(-2 / (m * k))  # log(mk/(mk-2))
    ratio_up = math.exp(frac + 2 * n * math.log1p(1 / k))
    ratio_down = math.exp(-frac + 2 * n * math.log1p(-1 / k))
    budget = (math.log(k) / k) * (n * 2 ** (2 * n + 3) + 32 / m)
    return [
        _check("ratio_upper", ratio_up, 2.0, "<="),
        _check("ratio_lower", ratio_down, 0.5, ">="),
        _check("log_ratio", 2 * n * math.log(k), frac, ">="),
        _check("sigma_budget", budget, M / (12 * math.pi), "<="),
    ]


def kn_ok(n: int, k: int, M: float) -> bool:
    return all(c["ok"] for c in kn_conditions(n, k, M))


@dataclass
class KnPlan:
    M: float
    k: tuple[int, ...]
    report: list = field(default_factory=list)


def kn_plan(M: float, n_max: int) -> KnPlan:
    """Least admissible k_n for n = 1..n_max, subject to k_1 >= 4 and k increasing.

    Every condition is monotone in k on k >= 4, so an exponential search
    followed by bisection finds the minimum.
    """
    if not M > 0 or n_max < 1:
        raise ValueError("need M > 0 and n_max >= 1")
    ks = []
    report = []
    lo_bound = 4
    for n in range(1, n_max + 1):
        lo = lo_bound
        if kn_ok(n, lo, M):
            k = lo
        else:
            step = 1
            hi = lo + step
            while not kn_ok(n, hi, M):
                lo = hi
                step *= 2
                hi = lo + step
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if kn_ok(n, mid, M):
                    hi = mid
                else:
                    lo = mid
            k = hi
        ks.append(k)
        report.append({"n": n, "k": k, "checks": kn_conditions(n, k, M)})
        lo_bound = k + 1
    return KnPlan(M, tuple(ks), report)
