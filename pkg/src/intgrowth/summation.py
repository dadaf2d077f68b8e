"""Certified power-series tails.

``power_tail(c, p, m0)`` is the Hurwitz-type sum  Σ_{m ≥ m0} (c + m)^(-p).
The leading part is summed directly; the rest is the Euler–Maclaurin
expansion, whose remainder for a completely monotone summand is bounded by
the first omitted correction term.
"""
from __future__ import annotations

import math
from fractions import Fraction

# B_2, B_4, ..., B_20
_BERNOULLI = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66),
              Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510), Fraction(43867, 798),
              Fraction(-174611, 330)]
_EM_TERMS = 8
EPS = 2.0 ** -52


def _rising(p: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= p + i
    return out


def _em_coefficients(p: int):
    return [float(_BERNOULLI[j - 1] / math.factorial(2 * j) * _rising(p, 2 * j - 1)) for j in range(1, _EM_TERMS + 2)]


_coef_cache: dict = {}


def power_tail(c: int, p: int, m0: int) -> tuple[float, float]:
    """Return (value, err) with |value - Σ_{m≥m0} (c+m)^-p| <= err."""
    if p < 2:
        raise ValueError("need p >= 2 for convergence")
    x0 = c + m0
    if x0 < 1:
        raise ValueError("sum must start at a positive base")
    start = max(x0, 4 * p + 30)
    head = [float(x) ** -p for x in range(x0, start)]
    coefs = _coef_cache.get(p)
    if coefs is None:
        coefs = _coef_cache[p] = _em_coefficients(p)
    X = float(start)
    lead = X ** (1 - p) / (p - 1) + 0.5 * X ** -p
    corr = [coefs[j] * X ** (-p - 2 * j - 1) for j in range(_EM_TERMS)]
    omitted = abs(coefs[_EM_TERMS] * X ** (-p - 2 * _EM_TERMS - 1))
    value = math.fsum(head + [lead] + corr)
    # powers carry a few ulps each; fsum itself is exact up to a final rounding
    rounding = 8 * p * EPS * value
    return value, omitted + rounding


def integral_bracket(c: int, p: int, m0: int) -> tuple[float, float]:
    """Crude bracket [∫_{x0}^∞, ∫_{x0-1}^∞] of s^-p for the same tail (x0 = c+m0 >= 2)."""
    x0 = c + m0
    if x0 < 2:
        raise ValueError("integral bracket needs x0 >= 2")
    return x0 ** (1 - p) / (p - 1), (x0 - 1) ** (1 - p) / (p - 1)
