"""Twisted Jacobi structures on coordinate charts.

Exact expressions live in :mod:`.expr`, the exterior calculus in
:mod:`.multivec`, the structure type and its brackets in :mod:`.jacobi`,
the two example families in :mod:`.structures` and leaf geometry in
:mod:`.foliation`.
"""

from .expr import Chart, ScalarExpr, Zero, is_zero, parse
from .foliation import classify_transitive, generators, rank_at, trace_leaf
from .jacobi import (
    FormPair,
    TwistedJacobiStructure,
    algebroid_bracket_omega,
    bracket_fun,
    jacobiator_check,
    verify_structure,
)
from .multivec import DiffForm, Multivector, exterior_derivative, schouten, sharp, sharp_ext, wedge
from .structures import TwistedContactData, TwistedLcsData, from_twisted_contact, from_twisted_lcs

__all__ = [
    "Chart",
    "DiffForm",
    "FormPair",
    "Multivector",
    "ScalarExpr",
    "TwistedContactData",
    "TwistedJacobiStructure",
    "TwistedLcsData",
    "Zero",
    "algebroid_bracket_omega",
    "bracket_fun",
    "classify_transitive",
    "exterior_derivative",
    "from_twisted_contact",
    "from_twisted_lcs",
    "generators",
    "is_zero",
    "jacobiator_check",
    "parse",
    "rank_at",
    "schouten",
    "sharp",
    "sharp_ext",
    "trace_leaf",
    "verify_structure",
    "wedge",
]
