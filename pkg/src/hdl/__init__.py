"""Exact point counts for Deligne-Lusztig strata, lattice models and their intersections over finite fields."""

__version__ = "0.1.0"
