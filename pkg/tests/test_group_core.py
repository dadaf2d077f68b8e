import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from intgrowth import group_core as gc
from intgrowth.group_core import (CapExceeded, Portrait, SignedGenerator, Word, act_prefix, ball_sizes, compose,
                                  equal_at_level, generator_portrait, identity, invert, order_at_level,
                                  word_act_prefix, word_to_portrait)

A = SignedGenerator("a")


def P(word, n, group="H"):
    return word_to_portrait(Word.parse(word, group), n)


def node(m, e=None, o=None, group="H"):
    leaf = Portrait.leaf(group)
    return Portrait.node(m, e or leaf, o or leaf)


# --- generator portraits ----------------------------------------------------

def test_generator_a_depth1():
    assert generator_portrait(A, 1) is node(1)


def test_d_is_trivial_at_depth2():
    assert P("d", 2) is identity(2)
    for s in [(x, y) for x in range(-3, 4) for y in range(-3, 4)]:
        assert word_act_prefix(Word.parse("d"), s) == s


def test_b_depth2():
    assert P("b", 2) is node(0, node(1), node(0))


def test_exactly_eight_signed_generators():
    assert len(set(gc.SIGNED_GENERATORS)) == 8


# --- compose / invert -------------------------------------------------------

def test_a_times_a_inverse():
    a = generator_portrait(A, 4)
    assert compose(a, invert(a)) is identity(4)


def test_b_squared_depth2():
    b = P("b", 2)
    assert compose(b, b) is node(0, node(2), node(0))


def test_ab_ne_ba_depth2():
    a, b = P("a", 2), P("b", 2)
    ab, ba = compose(a, b), compose(b, a)
    assert ab is not ba
    assert ab.offset == ba.offset == 1
    assert (ab.even, ab.odd) == (ba.odd, ba.even)


def test_invert_examples():
    assert invert(identity(3)) is identity(3)
    assert invert(P("a", 1)) is node(-1)
    assert invert(P("b", 2)) is node(0, node(-1), node(0))


def test_depth_mismatch():
    with pytest.raises(ValueError):
        compose(P("a", 2), P("a", 3))


# --- act_prefix examples ----------------------------------------------------

@pytest.mark.parametrize("word,s,out", [("a", (0, 0), (1, 0)), ("b", (1, 2, 3), (1, 2, 4)), ("d", (2, 7), (2, 7))])
def test_act_prefix_examples(word, s, out):
    w = Word.parse(word)
    assert act_prefix(w, s) == out
    assert act_prefix(word_to_portrait(w, len(s)), s) == out


def test_word_examples():
    for n in range(0, 7):
        assert P("aA", n) is identity(n)
        assert P("aabAAB", n) is identity(n)
        assert P("bcBC", n) is identity(n)


# --- equality at level --------------------------------------------------------

def test_equal_at_level_examples():
    b, c = Word.parse("b"), Word.parse("c")
    assert equal_at_level(b, c, 2)
    assert not equal_at_level(b, c, 3)
    w = Word.parse("abCd")
    assert equal_at_level(w, w, 5)


def test_b_c_differ_on_odd_then_even():
    # b and c disagree at coordinate 3 when l1 is odd and l2 even
    s = (1, 0, 0)
    assert word_act_prefix(Word.parse("b"), s) != word_act_prefix(Word.parse("c"), s)


# --- growth -------------------------------------------------------------------

def test_ball_examples():
    assert ball_sizes("H", 1, 10).counts == tuple(2 * r + 1 for r in range(11))
    assert ball_sizes("H", 2, 1).counts[1] == 5
    for n in (3, 4, 5):
        assert ball_sizes("H", n, 1).counts[1] == 9


def test_ball_counts_monotone_and_positive():
    tables = gc.growth_tower("H", range(1, 5), 4)
    for t in tables:
        assert all(c > 0 for c in t.counts)
        assert list(t.counts) == sorted(t.counts)
    for r in range(5):
        col = [t.counts[r] for t in tables]
        assert col == sorted(col)


def test_threads_do_not_change_table():
    assert ball_sizes("H", 4, 5, threads=4).counts == ball_sizes("H", 4, 5).counts


def test_cap_exceeded_carries_partial():
    with pytest.raises(CapExceeded) as info:
        ball_sizes("H", 4, 6, cap=100)
    part = info.value.partial
    assert part.counts[:3] == (1, 9, 53)


def test_growth_of_g_small():
    # G at level 1 is Z/2 generated by a
    assert ball_sizes("G", 1, 3).counts == (1, 2, 2, 2)


# --- orders ---------------------------------------------------------------------

def test_orders():
    assert order_at_level(Word.parse("a", "G"), 1) == 2
    assert order_at_level(Word.parse("a", "G"), 7) == 2
    assert order_at_level(Word.parse("b", "G"), 5) == 2
    assert order_at_level(Word.parse("ab", "G"), 8) == 16


def test_order_by_repeated_composition():
    # independent check: multiply one step at a time
    for w in ["ab", "abc", "ad", "acab"]:
        word = Word.parse(w, "G")
        p = word_to_portrait(word, 8)
        q, t = p, 1
        while not q.is_identity():
            q, t = compose(q, p), t + 1
        assert order_at_level(word, 8) == t


def test_h_is_torsion_free_in_quotients():
    with pytest.raises(CapExceeded):
        order_at_level(Word.parse("b"), 3, cap=1 << 10)
    assert order_at_level(Word.parse("d"), 2) == 1


# --- formats ----------------------------------------------------------------

def test_word_parse_and_str():
    w = Word.parse("abAB")
    assert str(w) == "abAB"
    assert w.letters[2] == SignedGenerator("a", True)
    with pytest.raises(ValueError):
        Word.parse("abx")


def test_portrait_json_roundtrip():
    p = P("abCdBa", 4)
    data = json.loads(json.dumps(p.to_json()))
    assert Portrait.from_json(data, 4) is p
    assert P("a", 1).to_json() == {"m": 1, "e": None, "o": None}
    with pytest.raises(ValueError):
        Portrait.from_json({"m": 1, "e": None}, 1)


def test_g_offsets_mod_2():
    assert P("aa", 3, "G") is identity(3, "G")


# --- properties ---------------------------------------------------------------

letters = st.sampled_from("abcdABCD")
words = st.text(alphabet="abcdABCD", max_size=20)


@settings(max_examples=300, deadline=None)
@given(words, st.lists(st.integers(-20, 20), max_size=6))
def test_portrait_action_matches_recursion(w, s):
    word = Word.parse(w)
    assert act_prefix(word_to_portrait(word, len(s)), tuple(s)) == word_act_prefix(word, s)


@settings(max_examples=100, deadline=None)
@given(words, st.lists(st.integers(0, 1), max_size=6))
def test_portrait_action_matches_recursion_g(w, s):
    word = Word.parse(w, "G")
    assert act_prefix(word_to_portrait(word, len(s)), tuple(s)) == word_act_prefix(word, s)


@settings(max_examples=100, deadline=None)
@given(words, words, words, st.integers(0, 5))
def test_group_axioms(x, y, z, n):
    p, q, r = P(x, n), P(y, n), P(z, n)
    assert compose(compose(p, q), r) is compose(p, compose(q, r))
    assert compose(p, invert(p)) is identity(n)
    assert compose(invert(p), p) is identity(n)
    assert compose(identity(n), p) is p is compose(p, identity(n))


@settings(max_examples=200, deadline=None)
@given(words, st.lists(st.integers(-9, 9), min_size=1, max_size=5), st.data())
def test_lexicographic_order_preserved(w, s, data):
    t = data.draw(st.lists(st.integers(-9, 9), min_size=len(s), max_size=len(s)))
    s, t = tuple(s), tuple(t)
    if s == t:
        return
    lo, hi = min(s, t), max(s, t)
    p = word_to_portrait(Word.parse(w), len(s))
    assert act_prefix(p, lo) < act_prefix(p, hi)


@pytest.mark.parametrize("n", range(0, 7))
def test_center_and_commuting(n):
    a2 = Word.parse("aa")
    for x in "bcd":
        assert P(str(gc.commutator(a2, Word.parse(x))), n) is identity(n)
    for x, y in [("b", "c"), ("b", "d"), ("c", "d")]:
        assert P(str(gc.commutator(Word.parse(x), Word.parse(y))), n) is identity(n)


def test_g_torsion_small_words():
    rng = random.Random(3)
    for _ in range(30):
        w = Word(tuple(SignedGenerator(rng.choice("abcd")) for _ in range(rng.randint(1, 4))), "G")
        orders = [order_at_level(w, n) for n in (8, 9, 10)]
        assert orders[0] == orders[1] == orders[2]
        assert orders[0] & (orders[0] - 1) == 0
