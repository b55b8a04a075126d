"""Exact/approximate scalars, multi-indices and Taylor-Fourier series."""
from .multiindex import degree, multi_indices, succ_compare, succ_key, unit
from .scalars import (
    ONE,
    ZERO,
    ExactComplex,
    I,
    as_exact,
    exact_sqrt,
    format_scalar,
    modulus,
    modulus_squared,
    parse_approx,
    parse_exact,
)
from .series import (
    IncompatibleOperandsError,
    TaylorFourierSeries,
    VectorSeries,
    compose,
    derive,
    series_arith,
    substitute,
)
from .system import TWO_PI, InvariantViolation, LinearPart, PeriodicSystem

__all__ = [
    "ONE",
    "ZERO",
    "I",
    "TWO_PI",
    "ExactComplex",
    "IncompatibleOperandsError",
    "InvariantViolation",
    "LinearPart",
    "PeriodicSystem",
    "TaylorFourierSeries",
    "VectorSeries",
    "as_exact",
    "compose",
    "degree",
    "derive",
    "exact_sqrt",
    "format_scalar",
    "modulus",
    "modulus_squared",
    "multi_indices",
    "parse_approx",
    "parse_exact",
    "series_arith",
    "substitute",
    "succ_compare",
    "succ_key",
    "unit",
]
