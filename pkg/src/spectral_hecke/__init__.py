"""Exact computations with group (co)homology of finite abelian p-groups over Z/p^m,
spectral Hecke algebras of torus Taylor-Wiles data and the derived Satake comparison."""

from .modarith import Ring, ModularMatrix, subquotient, normal_form
from .groups import FiniteAbelianPGroup
from .torext import group_homology, group_cohomology, bockstein, bockstein_suite, decompose_degree2
from .hecke import spectral_hecke_homotopy, localize_at_character, satake_split_check, derived_satake_graded
from .tangent import hurewicz_pairing, fib_tangent_table

__all__ = [
    "Ring", "ModularMatrix", "subquotient", "normal_form", "FiniteAbelianPGroup",
    "group_homology", "group_cohomology", "bockstein", "bockstein_suite", "decompose_degree2",
    "spectral_hecke_homotopy", "localize_at_character", "satake_split_check", "derived_satake_graded",
    "hurewicz_pairing", "fib_tangent_table",
]
