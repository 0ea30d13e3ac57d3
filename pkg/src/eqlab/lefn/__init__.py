"""Exact symbolic engine for subpolynomial log-power expressions.

Public surface: parsing/printing, exact evaluation, differentiation, growth
comparison, and the decision procedures for weighted equidistribution mod 1.
All values are immutable after construction; every operation is a pure
function, so everything here is safe to share across threads.
"""

from .core import (
    GrowthOrder,
    LEFunction,
    LETerm,
    LefnError,
    ParseError,
    PRECISION_BITS,
    QLin,
    compare_growth,
    growth_ratio_exact,
)
from .decide import (
    InadmissibleWeight,
    TsujiReport,
    UDVerdict,
    VectorVerdict,
    check_tsuji,
    decide_ud,
    decide_ud_vector,
    log_leading,
    poly_coefficients,
    rational_poly_part,
    substitute_xlogx,
    validate_admissible,
)
from .parse import LOG10E_LABEL, parse, to_text

__all__ = [
    "GrowthOrder",
    "InadmissibleWeight",
    "LEFunction",
    "LETerm",
    "LefnError",
    "LOG10E_LABEL",
    "ParseError",
    "PRECISION_BITS",
    "QLin",
    "TsujiReport",
    "UDVerdict",
    "VectorVerdict",
    "check_tsuji",
    "compare_growth",
    "decide_ud",
    "decide_ud_vector",
    "growth_ratio_exact",
    "log_leading",
    "parse",
    "poly_coefficients",
    "rational_poly_part",
    "substitute_xlogx",
    "to_text",
    "validate_admissible",
]
