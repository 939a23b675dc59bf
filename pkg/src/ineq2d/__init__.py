"""Numerical certificates for sharp double-integral inequalities on rectangles."""

from .expr import (
    EvalDomainError,
    EvalPoint,
    Expression,
    ParseError,
    differentiate,
    evaluate,
    mixed_partial,
    parse,
)
from .quad import (
    QuadConfig,
    QuadResult,
    RangeEstimate,
    RectDomain,
    boundary_residual,
    gauss_legendre_panel,
    integrate,
    l2_norm_sq,
    range_bounds,
)
from .bounds import (
    AssumptionReport,
    BoundReport,
    InequalityId,
    Status,
    anchored_half_width,
    check_assumptions,
    chebyshev_functional,
    chebyshev_l2_bound,
    chebyshev_mixed_bound,
    diaz_metcalf_1d,
    lupas_1d,
    ostrowski_2d,
    pointwise_2d,
    wirtinger_2d,
)
from .sharpness import (
    ExtremalSpec,
    ScanResult,
    ScanRow,
    achieved_ratio,
    build_extremal,
    compliant_family,
    compliant_family_1d,
    constant_scan,
)

__version__ = "0.1.0"

__all__ = [
    "AssumptionReport",
    "BoundReport",
    "EvalDomainError",
    "EvalPoint",
    "Expression",
    "ExtremalSpec",
    "InequalityId",
    "ParseError",
    "QuadConfig",
    "QuadResult",
    "RangeEstimate",
    "RectDomain",
    "ScanResult",
    "ScanRow",
    "Status",
    "achieved_ratio",
    "anchored_half_width",
    "boundary_residual",
    "build_extremal",
    "check_assumptions",
    "chebyshev_functional",
    "chebyshev_l2_bound",
    "chebyshev_mixed_bound",
    "compliant_family",
    "compliant_family_1d",
    "constant_scan",
    "diaz_metcalf_1d",
    "differentiate",
    "evaluate",
    "gauss_legendre_panel",
    "integrate",
    "l2_norm_sq",
    "lupas_1d",
    "mixed_partial",
    "ostrowski_2d",
    "parse",
    "pointwise_2d",
    "range_bounds",
    "wirtinger_2d",
]
