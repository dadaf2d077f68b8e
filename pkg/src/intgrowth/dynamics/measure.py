"""Atomic invariant measures and translation numbers."""
from __future__ import annotations

import json
import random
import warnings
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

from .pl import PLHomeo, as_fraction, fmt, invert


class MeasureNotPreserved(UserWarning):
    pass


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite sum of point masses, meaningful inside ``window`` (closed).

    A measure with an infinite orbit of atoms is represented by its truncation
    to a window; computations are only trusted inside it.
    """

    positions: tuple[Fraction, ...]
    masses: tuple[Fraction, ...]
    window: tuple[Fraction, Fraction]

    def __post_init__(self):
        if len(self.positions) != len(self.masses):
            raise ValueError("positions and masses differ in length")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("atom positions must be strictly increasing")
        if any(m <= 0 for m in self.masses):
            raise ValueError("atom masses must be positive")
        lo, hi = self.window
        if not lo <= hi or (self.positions and not (lo <= self.positions[0] and self.positions[-1] <= hi)):
            raise ValueError("atoms must lie in the window")

    @classmethod
    def from_atoms(cls, atoms, window=None) -> AtomicMeasure:
        atoms = sorted((as_fraction(p), as_fraction(m)) for p, m in atoms)
        pos = tuple(p for p, _ in atoms)
        mass = tuple(m for _, m in atoms)
        if window is None:
            if not pos:
                raise ValueError("an empty measure needs an explicit window")
            window = (pos[0], pos[-1])
        return cls(pos, mass, (as_fraction(window[0]), as_fraction(window[1])))

    def mass(self, lo, hi) -> Fraction:
        """μ([lo, hi))."""
        i, j = bisect_left(self.positions, lo), bisect_left(self.positions, hi)
        return sum(self.masses[i:j], Fraction(0))

    def atom_mass(self, x) -> Fraction:
        i = bisect_left(self.positions, x)
        if i < len(self.positions) and self.positions[i] == x:
            return self.masses[i]
        return Fraction(0)

    def to_json(self) -> dict:
        return {"atoms": [[fmt(p), fmt(m)] for p, m in zip(self.positions, self.masses)],
                "window": [fmt(self.window[0]), fmt(self.window[1])]}

    @classmethod
    def from_json(cls, data) -> AtomicMeasure:
        if isinstance(data, str):
            data = json.loads(data)
        if not isinstance(data, dict) or "atoms" not in data:
            raise ValueError("measure JSON needs an 'atoms' list")
        try:
            atoms = [(Fraction(str(p)), Fraction(str(m))) for p, m in data["atoms"]]
            window = data.get("window")
            if window is not None:
                window = (Fraction(str(window[0])), Fraction(str(window[1])))
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError("bad atom entry") from exc
        return cls.from_atoms(atoms, window)


def preserves(mu: AtomicMeasure, g: PLHomeo) -> bool:
    """Atoms whose image (or preimage) stays in the window are matched mass for mass."""
    lo, hi = mu.window
    for h in (g, invert(g)):
        for p, m in zip(mu.positions, mu.masses):
            if not (h.line or h.xs[0] <= p <= h.xs[-1]):
                continue  # outside an interval map's domain
            q = h(p)
            if lo <= q <= hi and mu.atom_mass(q) != m:
                return False
    return True


def translation_number(mu: AtomicMeasure, g: PLHomeo, x0) -> Fraction:
    """Signed μ-mass of the half-open interval between x0 and g(x0)."""
    x0 = as_fraction(x0)
    y = g(x0)
    lo, hi = mu.window
    if not (lo <= min(x0, y) and max(x0, y) <= hi):
        raise ValueError("[x0, g(x0)) leaves the measure's window")
    if not preserves(mu, g):
        warnings.warn("map does not preserve the measure; value follows the definition only",
                      MeasureNotPreserved, stacklevel=2)
    if y > x0:
        return mu.mass(x0, y)
    if y < x0:
        return -mu.mass(y, x0)
    return Fraction(0)


def atom_orbit(rng: random.Random, n_atoms: int = 80, period: int = 1):
    """Random increasing atom positions y_i with masses periodic of the given period."""
    pos = []
    x = Fraction(0)
    for _ in range(n_atoms):
        x += Fraction(rng.randint(1, 9), rng.randint(1, 4))
        pos.append(x)
    base = [Fraction(rng.randint(1, 5), rng.randint(1, 3)) for _ in range(period)]
    return tuple(pos), tuple(base[i % period] for i in range(n_atoms))


def orbit_measure(positions, masses, margin: int) -> AtomicMeasure:
    """The orbit measure restricted to a window ``margin`` atoms inside each end.

    Shift maps built from the full orbit are exact on the window as long as
    the total shift of any composite stays below the margin.
    """
    inner = list(zip(positions, masses))[margin:len(positions) - margin]
    return AtomicMeasure.from_atoms(inner, (positions[margin], positions[-1 - margin]))


def shift_map(positions, t: int) -> PLHomeo:
    """Line map sending atom i to atom i+t, linear between atoms."""
    N = len(positions)
    knots = [(positions[i], positions[i + t]) for i in range(max(0, -t), min(N, N - t))]
    return PLHomeo(knots, line=True)
