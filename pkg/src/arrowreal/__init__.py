"""Realising finite groups as automorphism groups of arrows: relational
systems, simple graphs and Sullivan algebras, with exhaustive verification."""

__version__ = "0.1.0"
