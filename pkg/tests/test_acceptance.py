"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (shown with ``-s`` and
repeated in the terminal summary).  Run directly with
``python tests/test_acceptance.py``.
"""
import csv
import io
import itertools
import math
import random
import time
import warnings
from contextlib import contextmanager
from fractions import Fraction as F

import mpmath
import numpy as np
import pytest

from intgrowth import group_core as gc
from intgrowth.diffeo_action import ActionConfig, verify_suite
from intgrowth.dynamics import (MeasureNotPreserved, PLHomeo, atom_orbit, detect_crossed, orbit_measure,
                                pingpong_certificate, pl_compose, pl_invert, shift_map, translation_number,
                                verify_certificate, wreath_pair, wreath_separation)
from intgrowth.dynamics.crossing import CrossWitness
from intgrowth.geometry import (EquivariantFamily, GeometryParams, IntervalSystem, gap_ratio_holds, kn_plan)
from intgrowth.summation import integral_bracket

import oracles

RESULTS: dict[int, str] = {}


@contextmanager
def criterion(n, title, limit=None):
    info = {}
    t0 = time.perf_counter()
    try:
        yield info
        elapsed = time.perf_counter() - t0
        if limit is not None and elapsed >= limit:
            raise AssertionError(f"took {elapsed:.1f}s, limit {limit}s")
    except BaseException as exc:
        elapsed = time.perf_counter() - t0
        RESULTS[n] = f"[FAIL] {n:>2}. {title} ({elapsed:.1f}s): {exc}"
        print(RESULTS[n])
        raise
    detail = "; ".join(f"{k}={v}" for k, v in info.items())
    RESULTS[n] = f"[PASS] {n:>2}. {title} ({elapsed:.1f}s){': ' + detail if detail else ''}"
    print(RESULTS[n])


def W(s, group="H"):
    return gc.Word.parse(s, group)


# independent generator recursion: a = (1; id, id), b = (0; a, c), c = (0; a, d), d = (0; id, b)
SECTIONS = {"a": (None, None), "b": ("a", "c"), "c": ("a", "d"), "d": (None, "b")}


def direct_letter(letter, inv, s, modulus=None):
    if not s or letter is None:
        return s
    head, rest = s[0], s[1:]
    if letter == "a":
        head = head + (-1 if inv else 1)
        return ((head % modulus) if modulus else head,) + rest
    sec = SECTIONS[letter][head % 2]
    return (head,) + direct_letter(sec, inv, rest, modulus)


def direct_word(word, s, modulus=None):
    for ch in reversed(word):
        s = direct_letter(ch.lower(), ch.isupper(), s, modulus)
    return s


# --- 1 -------------------------------------------------------------------------------------------

def test_01_oracle_equivalence():
    with criterion(1, "portrait action equals direct recursive action", 30) as info:
        rng = random.Random(2024)
        cases = 0
        for _ in range(10_000):
            n = rng.randint(0, 6)
            word = "".join(rng.choice("abcdABCD") for _ in range(rng.randint(0, 20)))
            s = tuple(rng.randint(-50, 50) for _ in range(n))
            p = gc.word_to_portrait(W(word), n)
            assert gc.act_prefix(p, s) == direct_word(word, s), (word, s)
            cases += 1
        info["cases"] = cases


# --- 2 -------------------------------------------------------------------------------------------

def test_02_relations():
    with criterion(2, "commutator relations hold at every depth <= 6", 10) as info:
        a2 = W("aa")
        rels = [gc.commutator(a2, W(x)) for x in "bcd"]
        rels += [gc.commutator(W(x), W(y)) for x, y in [("b", "c"), ("b", "d"), ("c", "d")]]
        for n in range(7):
            for r in rels:
                assert gc.word_to_portrait(r, n).is_identity(), (str(r), n)
        info["relations"] = len(rels)


# --- 3 -------------------------------------------------------------------------------------------

def test_03_quotient_collapse():
    with criterion(3, "quotient collapse at levels 1-3") as info:
        assert gc.equal_at_level(W("d"), gc.Word((), "H"), 2)
        assert gc.equal_at_level(W("b"), W("c"), 2)
        assert not gc.equal_at_level(W("b"), W("c"), 3)
        assert gc.ball_sizes("H", 2, 1).counts[1] == 5
        for n in (3, 4, 5, 6):
            assert gc.ball_sizes("H", n, 1).counts[1] == 9
        assert gc.ball_sizes("H", 1, 10).counts == tuple(2 * r + 1 for r in range(11))
        info["B1"] = "5 at level 2, 9 at levels 3-6"


# --- 4 -------------------------------------------------------------------------------------------

def test_04_growth_tower(tmp_path):
    with criterion(4, "growth tower monotone in level and stabilized by level 6", 60) as info:
        tables = gc.growth_tower("H", range(1, 7), 6)
        for r in range(7):
            col = [t.counts[r] for t in tables]
            assert col == sorted(col), (r, col)
        stab = gc.stabilized_counts(tables)
        assert stab is not None and stab == tables[-1].counts
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["level", "r", "count"])
        for t in tables:
            w.writerows(t.rows())
        (tmp_path / "growth_tower.csv").write_text(buf.getvalue())
        print("\n" + buf.getvalue())
        info["stabilized"] = ",".join(map(str, stab))


# --- 5 -------------------------------------------------------------------------------------------

def step_order(word, n):
    # independent of repeated squaring: multiply one factor at a time
    p = gc.word_to_portrait(word, n)
    q, t = p, 1
    while not q.is_identity():
        q, t = gc.compose(q, p), t + 1
    return t


def test_05_g_torsion():
    with criterion(5, "G words of length <= 4 have 2-power orders; ord(ab) = 16") as info:
        for ch in "abcd":
            assert gc.equal_at_level(W(ch, "G"), W(ch.upper(), "G"), 10)
        words = [""]
        for length in range(1, 5):
            words += ["".join(t) for t in itertools.product("abcd", repeat=length)]
        worst = 1
        for w in words:
            word = W(w, "G")
            orders = [gc.order_at_level(word, n) for n in (8, 9, 10)]
            assert orders[0] == orders[1] == orders[2], (w, orders)
            assert orders[0] & (orders[0] - 1) == 0, (w, orders)
            worst = max(worst, orders[0])
        ab = W("ab", "G")
        assert [gc.order_at_level(ab, n) for n in (5, 8, 10)] == [16, 16, 16]
        assert step_order(ab, 10) == 16
        info["words"] = len(words)
        info["max order"] = worst


# --- 6 -------------------------------------------------------------------------------------------

def test_06_yoccoz_analytics():
    with criterion(6, "equivariant family: equivariance, sup|phi'-1|, second-derivative bounds") as info:
        Y = EquivariantFamily("yoccoz")
        rng = random.Random(6)
        eq_res = sup_err = 0.0
        for _ in range(50):
            u = 10 ** rng.uniform(-1, 1)
            v = u * 2 ** rng.uniform(-1, 1)
            w = v * 2 ** rng.uniform(-1, 1)
            xs = np.linspace(0, u, 1001)  # 10³ steps; the midpoint is a grid point
            d1 = np.empty_like(xs)
            d2 = np.empty_like(xs)
            for i, x in enumerate(xs):
                y, d1[i] = Y(u, v, x)
                d2[i] = Y.second(u, v, x)
                z, _ = Y(v, w, min(y, v))
                eq_res = max(eq_res, abs(z - Y(u, w, x)[0]))
            peak = np.abs(d1 - 1).max()
            sup_err = max(sup_err, abs(peak - abs(v * v / (u * u) - 1)))
            bound = 6 * math.pi * abs(v / u - 1) / u
            assert np.abs(d2).max() <= bound * (1 + 1e-12)
            assert np.abs(d2).max() >= 2 / u * abs(v / u - 1) * (1 - 1e-12)
        assert eq_res <= 1e-12
        assert sup_err <= 1e-6
        info["equivariance residual"] = f"{eq_res:.1e}"
        info["sup error"] = f"{sup_err:.1e}"


# --- 7 -------------------------------------------------------------------------------------------

def test_07_geometry_certification():
    with criterion(7, "T bracketed within 1e-12; gap-ratio bound at depth <= 3; T <= 1") as info:
        L = 1_500_000
        for k1 in (4, 15523):
            sys_ = IntervalSystem(GeometryParams.navas([k1, k1 + 1]))
            m = np.arange(1, L + 1, dtype=np.float64) + k1
            partial = math.fsum([k1 ** -2.0] + list(2.0 / (m * m)))
            lo, hi = integral_bracket(k1, 2, L + 1)
            lo, hi = partial + 2 * lo, partial + 2 * hi
            assert hi - lo <= 1e-12
            slack = 1e-15
            assert lo - slack <= sys_.T <= hi + slack, (k1, lo, sys_.T, hi)
            exact = 1 / mpmath.mpf(k1) ** 2 + 2 * mpmath.zeta(2, k1 + 1)
            assert lo - slack <= float(exact) <= hi + slack
            info[f"T_{k1}"] = f"{sys_.T:.15g} in [{lo:.15g}, {hi:.15g}]"

        # |J|/|I| depends on an index only through its depth n and S = Σ|l_i|.
        k = kn_plan(1.0, 4).k
        sys_ = IntervalSystem(GeometryParams.navas(k))
        rng = random.Random(7)
        for _ in range(200):
            n, S = rng.randint(1, 3), rng.randint(0, 500)
            idx = tuple(rng.choice((-1, 1)) * x for x in random_composition(rng, S, n))
            rep = (S,) + (0,) * (n - 1)
            assert sys_.len_I(idx) == sys_.len_I(rep) and sys_.child_sum(idx) == sys_.child_sum(rep)
        S_MAX = 20_000
        for n in (1, 2, 3):
            for S in range(S_MAX + 1):
                assert gap_ratio_holds(sys_, (S,) + (0,) * (n - 1)), (n, S)
        # Beyond S_MAX: the children of a depth-n index sum to at most
        # B^-p + 2 B^(1-p)/(p-1) with B = S + k_{n+1}, p = 2n+2, and since
        # k_{n+1} > k_n this is below 2/((2n+1)A^(2n+1)) with A = S + k_n for
        # every S (mean value theorem on x^-(2n+1)).  Spot-check it exactly.
        for n in (1, 2, 3):
            p = 2 * n + 2
            for S in [S_MAX] + [10 ** e for e in range(5, 16)]:
                A, B = S + k[n - 1], S + k[n]
                upper = F(1, B ** p) + F(2, (p - 1) * B ** (p - 1))
                assert upper <= F(2, (2 * n + 1) * A ** (2 * n + 1))
        info["gap-ratio bound"] = f"n<=3, all S<={S_MAX} numerically, bound exact beyond"

        for k1 in range(4, 200):
            assert IntervalSystem(GeometryParams.navas([k1, k1 + 1])).T <= 1
        info["T<=1"] = "k1 in [4,200), decreasing in k1"


def random_composition(rng, S, n):
    cuts = sorted(rng.randint(0, S) for _ in range(n - 1))
    return [b - a for a, b in zip([0] + cuts, cuts + [S])]


# --- 8 -------------------------------------------------------------------------------------------

def test_08_kn_planner():
    with criterion(8, "k_n planner for M = 1, n <= 5: valid, increasing, minimal") as info:
        plan = kn_plan(1.0, 5)
        assert len(plan.k) == 5 and plan.k[0] >= 4
        prev = 3
        for n, k in enumerate(plan.k, start=1):
            assert k > prev
            assert all(oracles.kn_conditions_mp(n, k, 1.0)), (n, k)
            # k - 1 breaks a condition or the strict increase
            assert k - 1 <= prev or not all(oracles.kn_conditions_mp(n, k - 1, 1.0)), (n, k)
            prev = k
        info["k"] = plan.k


# --- 9, 10 -----------------------------------------------------------------------------------------

_REPORTS = {}


def planned_reports():
    if not _REPORTS:
        geo = GeometryParams.navas(kn_plan(1.0, 4).k)
        for n in (1, 2, 3):
            t0 = time.perf_counter()
            cfg = ActionConfig(EquivariantFamily("yoccoz"), geo, n)
            _REPORTS[n] = (verify_suite(cfg, samples=1000, seed=n, M=1.0), time.perf_counter() - t0)
    return _REPORTS


def test_09_embedding_verification():
    with criterion(9, "planned embeddings at depth 1-3: homomorphism, tangency, navas_log norm <= 1", 120) as info:
        reps = planned_reports()
        for n, (rep, _) in reps.items():
            assert rep.samples["homomorphism"] >= 1000
            assert rep.homomorphism_residual <= 1e-9, (n, rep.homomorphism_residual)
            assert rep.tangency_deviation <= 1e-6, (n, rep.tangency_deviation)
            assert max(rep.sigma_norm.values()) <= 1.0, (n, rep.sigma_norm)
            info[f"n={n}"] = (f"res {rep.homomorphism_residual:.1e}, tan {rep.tangency_deviation:.1e}, "
                              f"norm {max(rep.sigma_norm.values()):.2e}")
        info["suite time"] = f"{sum(t for _, t in reps.values()):.1f}s"


def test_10_holder_diagnostic():
    with criterion(10, "Hölder 1/2 constant of B_n' grows from n = 1 to n = 3") as info:
        reps = planned_reports()
        hb = {n: rep.holder_constant["b"] for n, (rep, _) in reps.items()}
        assert all(v is not None and math.isfinite(v) for v in hb.values())
        assert hb[3] > hb[1]
        info["B_n'"] = ", ".join(f"n={n}: {v:.3g}" for n, v in hb.items())


# --- 11 ----------------------------------------------------------------------------------------------

def knot_map(*pairs):
    return PLHomeo([(F(x), F(y)) for x, y in pairs])


def test_11_dynamics():
    with criterion(11, "crossed corpus, ping-pong re-check, tau additivity, wreath separation", 60) as info:
        f = knot_map((0, 0), ("1/8", "3/16"), ("1/4", "1/4"), ("1/2", "3/8"), ("3/4", "3/4"),
                     ("7/8", "13/16"), (1, 1))
        g = knot_map((0, 0), ("1/4", "1/2"), (1, 1))
        ident = PLHomeo.identity()
        f2 = pl_compose(f, f)
        assert detect_crossed(f, ident) is None and detect_crossed(ident, f) is None
        assert detect_crossed(f, f2) is None and detect_crossed(f2, f) is None
        w = detect_crossed(f, g)
        assert w == CrossWitness(F(1, 4), F(3, 4), "f", "g", "left")
        assert detect_crossed(g, f) is not None

        cert = pingpong_certificate(f, g, w)
        assert verify_certificate(cert)
        # rebuild the two generators from f and g and re-apply them to X
        Fm, fn = ident, ident
        for _ in range(cert.m):
            Fm = pl_compose(f if cert.fixer_sign == 1 else pl_invert(f), Fm)
        for _ in range(cert.n):
            fn = pl_compose(f if cert.fixer_sign == 1 else pl_invert(f), fn)
        Gn = pl_compose(g, fn)
        lo, hi = cert.X
        FX, GX = (Fm(lo), Fm(hi)), (Gn(lo), Gn(hi))
        assert lo <= FX[0] < FX[1] <= hi and lo <= GX[0] < GX[1] <= hi
        assert FX[1] < GX[0] or GX[1] < FX[0]
        info["ping-pong"] = f"m={cert.m} n={cert.n} X=[{lo},{hi}] FX=[{FX[0]},{FX[1]}] GX=[{GX[0]},{GX[1]}]"

        rng = random.Random(11)
        with warnings.catch_warnings():
            warnings.simplefilter("error", MeasureNotPreserved)
            for _ in range(100):
                period = rng.randint(1, 3)
                pos, mass = atom_orbit(rng, 90, period)
                mu = orbit_measure(pos, mass, 20)
                s, t = period * rng.randint(-4, 4), period * rng.randint(-4, 4)
                gs, ht = shift_map(pos, s), shift_map(pos, t)
                x0 = pos[45] + F(rng.randint(0, 99), 100) * (pos[46] - pos[45])
                tau = lambda h: translation_number(mu, h, x0)
                assert tau(pl_compose(gs, ht)) == tau(gs) + tau(ht)
        info["tau pairs"] = 100

        fw, gw = wreath_pair(F(1, 2), F(1, 2))
        rep = wreath_separation(fw, gw, F(1, 2), 6)
        assert rep.failures == [] and rep.pairs == 126 * 125 // 2
        info["wreath pairs"] = rep.pairs


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
