"""Automaton groups of intermediate growth, their interval diffeomorphism
actions, and a small exact toolbox for one-dimensional dynamics."""

__version__ = "0.1.0"
