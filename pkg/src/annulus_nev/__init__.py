"""Numerical Nevanlinna theory on annuli.

Symbolic meromorphic test functions, divisors, the annular counting,
proximity and characteristic functions, and margin checks for the
second-main-theorem family of inequalities.
"""

from .errors import (
    AnnulusError,
    BoundaryZeroError,
    ConfigError,
    DegenerateFitError,
    DegenerateTargetsError,
    ExprSyntaxError,
    IdenticallyZeroError,
    IllConditionedError,
    NonDistinctTargetsError,
    NotRationalError,
    QuadratureFailure,
    RadiusOutOfRangeError,
)
from .expr import (
    MeroExpr,
    PoleSignal,
    differentiate,
    evaluate,
    is_identically_equal,
    simplify_rational,
    to_text,
)
from .parser import parse
from .polynomials import LaurentPolynomial, Polynomial, RationalFn

__version__ = "0.1.0"

__all__ = [
    "AnnulusError",
    "BoundaryZeroError",
    "ConfigError",
    "DegenerateFitError",
    "DegenerateTargetsError",
    "ExprSyntaxError",
    "IdenticallyZeroError",
    "IllConditionedError",
    "LaurentPolynomial",
    "MeroExpr",
    "NonDistinctTargetsError",
    "NotRationalError",
    "PoleSignal",
    "Polynomial",
    "QuadratureFailure",
    "RadiusOutOfRangeError",
    "RationalFn",
    "differentiate",
    "evaluate",
    "is_identically_equal",
    "parse",
    "simplify_rational",
    "to_text",
]
