"""Exact symbolic scalar expressions over a coordinate chart."""

from .parser import ParseError, UnknownIdentifierError, parse, parse_tree
from .scalar import (
    ONE,
    ZERO,
    ZERO_TOLERANCE,
    Chart,
    DomainError,
    EvaluationError,
    SamplingError,
    ScalarExpr,
    Zero,
    ZeroTest,
    cos,
    differentiate,
    evaluate,
    exp,
    is_zero,
    sample_points,
    sin,
)

__all__ = [
    "Chart",
    "DomainError",
    "EvaluationError",
    "ONE",
    "ParseError",
    "SamplingError",
    "ScalarExpr",
    "UnknownIdentifierError",
    "ZERO",
    "ZERO_TOLERANCE",
    "Zero",
    "ZeroTest",
    "cos",
    "differentiate",
    "evaluate",
    "exp",
    "is_zero",
    "parse",
    "parse_tree",
    "sample_points",
    "sin",
]
