"""Distinguished Poincaré-Dulac normal forms of periodic systems."""
__version__ = "0.1.0"

from .algebra import (
    ExactComplex,
    LinearPart,
    PeriodicSystem,
    TaylorFourierSeries,
    VectorSeries,
    compose,
    parse_exact,
)
from .normalform import NormalizationResult, normalize, residual_check

__all__ = [
    "ExactComplex",
    "LinearPart",
    "NormalizationResult",
    "PeriodicSystem",
    "TaylorFourierSeries",
    "VectorSeries",
    "__version__",
    "compose",
    "normalize",
    "parse_exact",
    "residual_check",
]
