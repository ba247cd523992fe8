"""Graded-commutative algebra engine and the Sullivan algebras of digraphs."""

from .poly import GradedAlgebra, GradedPoly, derivation, monomials_of_degree, poly_add, poly_multiply
from .sullivan import (
    AlgebraMorphism,
    SullivanPresentation,
    basis_at_degree,
    check_d_squared,
    check_ellipticity_witnesses,
    enumerate_morphisms_constrained,
    induced_algebra_morphism,
    linear_part,
    pure_differential,
    sullivan_presentation,
)

__all__ = [
    "AlgebraMorphism",
    "GradedAlgebra",
    "GradedPoly",
    "SullivanPresentation",
    "basis_at_degree",
    "check_d_squared",
    "check_ellipticity_witnesses",
    "derivation",
    "enumerate_morphisms_constrained",
    "induced_algebra_morphism",
    "linear_part",
    "monomials_of_degree",
    "poly_add",
    "poly_multiply",
    "pure_differential",
    "sullivan_presentation",
]
