"""Inequality checks: each bound returns a BoundReport with lhs, rhs, ratio,
a propagated quadrature error budget, hypothesis-check results, and a status.

Hypothesis checking is advisory: lhs and rhs are always computed, and the
status separates a mathematical violation (VIOLATED, hypotheses satisfied)
from an inadmissible input (ASSUMPTIONS_UNMET, ratio still reported).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .expr import EvalPoint, Expression, Mul, Num, Sub, differentiate, evaluate, mixed_partial
from .quad import (
    DEFAULT_CONFIG,
    QuadConfig,
    QuadResult,
    RectDomain,
    boundary_residual,
    integrate,
    l2_norm_sq,
    line_residual,
    range_bounds,
)

PI = math.pi

# multiplicative slack on rhs when deciding HOLDS vs VIOLATED
_REL_SLACK = 1e-8

# residual tolerance: 1e-8 * (1 + max|f| on a 33x33 grid)
_RESIDUAL_REL = 1e-8
_SCALE_GRID = 33

CAVEAT_NON_SMOOTH = "non-smooth input: L2 norm of the mixed partial ignores distributional parts"
CAVEAT_RANGE_ESTIMATED = "range estimated: rhs uses inner (grid-refined) range bounds"


class InequalityId(str, Enum):
    WIRTINGER_2D = "wirtinger2d"
    POINTWISE_2D = "pointwise2d"
    CHEBYSHEV_L2 = "chebyshev-l2"
    CHEBYSHEV_L2_AREA_VARIANT = "chebyshev-l2-area"
    CHEBYSHEV_MIXED = "chebyshev-mixed"
    OSTROWSKI_2D = "ostrowski2d"
    DIAZ_METCALF_1D = "diaz-metcalf-1d"
    LUPAS_1D = "lupas-1d"


class Status(str, Enum):
    HOLDS = "HOLDS"
    VIOLATED = "VIOLATED"
    ASSUMPTIONS_UNMET = "ASSUMPTIONS_UNMET"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class AssumptionReport:
    """Boundary-condition residuals and which hypothesis sets are satisfied.

    weak-left:  f(a,.) = f(.,c) = 0;   weak-right: f(b,.) = f(.,d) = 0.
    strict adds the first partials on the same edges, so strict implies weak
    on the same side.  Residuals are maxima over edge samples; a condition is
    satisfied when its residual is at most 1e-8 * (1 + max|f|) with max|f|
    taken on a 33x33 grid.
    """

    mode: str
    residuals: dict[str, float] = field(default_factory=dict)
    fx_residuals: dict[str, float] | None = None
    fy_residuals: dict[str, float] | None = None
    scale: float = 0.0
    tol: float = 0.0
    weak_left: bool = True
    weak_right: bool = True
    strict_left: bool | None = None
    strict_right: bool | None = None
    required: tuple[str, ...] = ()
    satisfied: bool = True
    gamma: float | None = None
    Gamma: float | None = None
    range_estimated: bool = False
    anchor_line_residuals: tuple[float, float] | None = None


@dataclass(frozen=True)
class BoundReport:
    inequality: InequalityId
    variant: str | None
    lhs: float
    rhs: float
    ratio: float | None  # None when rhs == 0
    eps: float           # first-order propagated quadrature error budget
    assumptions: AssumptionReport
    status: Status
    caveats: tuple[str, ...] = ()
    assumptions_g: AssumptionReport | None = None


def anchored_half_width(lo: float, hi: float, t: float) -> float:
    """(hi-lo)/2 + |t - (lo+hi)/2|: minimal at the midpoint, maximal at {lo, hi}."""
    return 0.5 * (hi - lo) + abs(t - 0.5 * (lo + hi))


# ---------------------------------------------------------------------------
# Hypothesis checking
# ---------------------------------------------------------------------------


def _grid_scale(e: Expression, dom: RectDomain) -> float:
    xs = np.linspace(dom.a, dom.b, _SCALE_GRID)
    ys = np.linspace(dom.c, dom.d, _SCALE_GRID)
    return float(np.max(np.abs(e(xs[:, None], ys[None, :]))))


def _edge_residuals(e: Expression, dom: RectDomain) -> dict[str, float]:
    return {edge: boundary_residual(e, dom, edge) for edge in ("x=a", "x=b", "y=c", "y=d")}


def check_assumptions(f: Expression, dom: RectDomain, mode: str = "weak") -> AssumptionReport:
    """Evaluate the boundary hypotheses of f on dom.

    mode='weak' checks only f on the edges; mode='strict' also requires the
    first partials f_x and f_y to vanish on the same edges.
    """
    if mode not in ("weak", "strict"):
        raise ValueError(f"mode must be 'weak' or 'strict', got {mode!r}")
    scale = _grid_scale(f, dom)
    tol = _RESIDUAL_REL * (1.0 + scale)
    res = _edge_residuals(f, dom)
    weak_left = res["x=a"] <= tol and res["y=c"] <= tol
    weak_right = res["x=b"] <= tol and res["y=d"] <= tol
    fx_res = fy_res = None
    strict_left = strict_right = None
    if mode == "strict":
        fx = differentiate(f, "x")
        fy = differentiate(f, "y")
        fx_tol = _RESIDUAL_REL * (1.0 + _grid_scale(fx, dom))
        fy_tol = _RESIDUAL_REL * (1.0 + _grid_scale(fy, dom))
        fx_res = _edge_residuals(fx, dom)
        fy_res = _edge_residuals(fy, dom)
        strict_left = (
            weak_left
            and fx_res["x=a"] <= fx_tol and fx_res["y=c"] <= fx_tol
            and fy_res["x=a"] <= fy_tol and fy_res["y=c"] <= fy_tol
        )
        strict_right = (
            weak_right
            and fx_res["x=b"] <= fx_tol and fx_res["y=d"] <= fx_tol
            and fy_res["x=b"] <= fy_tol and fy_res["y=d"] <= fy_tol
        )
    return AssumptionReport(
        mode=mode,
        residuals=res,
        fx_residuals=fx_res,
        fy_residuals=fy_res,
        scale=scale,
        tol=tol,
        weak_left=weak_left,
        weak_right=weak_right,
        strict_left=strict_left,
        strict_right=strict_right,
    )


def _require(asm: AssumptionReport, sides: tuple[str, ...]) -> AssumptionReport:
    """Attach the required condition set and evaluate it."""
    flags = {
        "weak-left": asm.weak_left,
        "weak-right": asm.weak_right,
        "strict-left": asm.strict_left,
        "strict-right": asm.strict_right,
    }
    ok = all(bool(flags[s]) for s in sides)
    return replace(asm, required=sides, satisfied=ok)


def _sides(hypothesis: str, left: bool, right: bool) -> tuple[str, ...]:
    prefix = "strict" if hypothesis == "strict" else "weak"
    sides: tuple[str, ...] = ()
    if left:
        sides += (f"{prefix}-left",)
    if right:
        sides += (f"{prefix}-right",)
    return sides


_NO_ASSUMPTIONS = AssumptionReport(mode="none", required=(), satisfied=True)


# ---------------------------------------------------------------------------
# Report assembly
# ---------------------------------------------------------------------------


def _finalize(
    ineq: InequalityId,
    variant: str | None,
    lhs: float,
    rhs: float,
    eps: float,
    asm: AssumptionReport,
    converged: bool,
    caveats: tuple[str, ...] = (),
    asm_g: AssumptionReport | None = None,
) -> BoundReport:
    ok = asm.satisfied and (asm_g is None or asm_g.satisfied)
    if not converged:
        status = Status.INCONCLUSIVE
    elif rhs == 0.0 and lhs <= eps:
        # degenerate (typically constant) inputs: a vanishing deviation
        # trivially holds, whatever the hypothesis checks say
        status = Status.HOLDS
    elif not ok:
        status = Status.ASSUMPTIONS_UNMET
    elif lhs <= rhs * (1.0 + _REL_SLACK) + eps:
        status = Status.HOLDS
    else:
        status = Status.VIOLATED
    ratio = lhs / rhs if rhs != 0.0 else None
    return BoundReport(ineq, variant, lhs, rhs, ratio, eps, asm, status, caveats, asm_g)


def _sqrt_with_err(value: float, err: float) -> tuple[float, float]:
    """sqrt of a non-negative integral with first-order error propagation."""
    v = math.sqrt(max(value, 0.0))
    e = err / (2.0 * v) if v > 0.0 else math.sqrt(max(err, 0.0))
    return v, e


def _smooth_caveat(*exprs: Expression) -> tuple[str, ...]:
    return (CAVEAT_NON_SMOOTH,) if any(not e.smooth for e in exprs) else ()


# ---------------------------------------------------------------------------
# 2D bounds
# ---------------------------------------------------------------------------


def wirtinger_2d(
    f: Expression,
    dom: RectDomain,
    side: str = "left",
    cfg: QuadConfig = DEFAULT_CONFIG,
    hypothesis: str = "weak",
) -> BoundReport:
    """iint f^2 <= (16/pi^4) (b-a)^2 (d-c)^2 iint (d2f/dxdy)^2.

    side='left' attaches the lower-corner boundary conditions, side='right'
    the upper-corner ones; the sharp constant is attained either way.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    lq = l2_norm_sq(f, dom, cfg)
    rq = l2_norm_sq(mixed_partial(f), dom, cfg)
    coef = (16.0 / PI**4) * dom.width**2 * dom.height**2
    rhs = coef * rq.value
    eps = lq.error_estimate + coef * rq.error_estimate
    asm = _require(
        check_assumptions(f, dom, hypothesis),
        _sides(hypothesis, left=side == "left", right=side == "right"),
    )
    return _finalize(
        InequalityId.WIRTINGER_2D, side, lq.value, rhs, eps, asm,
        lq.converged and rq.converged, _smooth_caveat(f),
    )


def pointwise_2d(
    f: Expression,
    dom: RectDomain,
    anchor: EvalPoint,
    cfg: QuadConfig = DEFAULT_CONFIG,
    hypothesis: str = "weak",
) -> BoundReport:
    """iint |f - f(anchor)|^2 against the anchored bracket bound.

    rhs = (16/pi^4) [w/2 + |xi - mid_x|]^2 [h/2 + |eta - mid_y|]^2
          * iint (d2f/dxdy)^2, for an anchor strictly inside the rectangle.

    Attaches both weak sides on f.  The report also carries the residuals of
    the shifted function along the anchor cross-lines x=xi and y=eta (the
    decomposition into the four anchor-induced subrectangles needs them to
    vanish for the proof chain to apply; they are diagnostics, not required).
    """
    if not (dom.a < anchor.x < dom.b and dom.c < anchor.y < dom.d):
        raise ValueError(f"anchor {anchor} must be strictly inside the domain")
    t = evaluate(f, anchor)
    shifted = Expression(Sub(f.root, Num(t)), f.smooth)
    lq = l2_norm_sq(shifted, dom, cfg, split_hints=anchor)
    rq = l2_norm_sq(mixed_partial(f), dom, cfg, split_hints=anchor)
    bx = anchored_half_width(dom.a, dom.b, anchor.x)
    by = anchored_half_width(dom.c, dom.d, anchor.y)
    coef = (16.0 / PI**4) * bx**2 * by**2
    rhs = coef * rq.value
    eps = lq.error_estimate + coef * rq.error_estimate
    asm = _require(
        check_assumptions(f, dom, hypothesis),
        _sides(hypothesis, left=True, right=True),
    )
    asm = replace(
        asm,
        anchor_line_residuals=(
            line_residual(shifted, dom, "x", anchor.x),
            line_residual(shifted, dom, "y", anchor.y),
        ),
    )
    return _finalize(
        InequalityId.POINTWISE_2D, None, lq.value, rhs, eps, asm,
        lq.converged and rq.converged, _smooth_caveat(f),
    )


def chebyshev_functional(
    f: Expression, g: Expression, dom: RectDomain, cfg: QuadConfig = DEFAULT_CONFIG
) -> QuadResult:
    """T(f,g) = mean(fg) - mean(f) mean(g) over dom, with propagated error."""
    prod = Expression(Mul(f.root, g.root), f.smooth and g.smooth)
    qfg = integrate(prod, dom, cfg)
    qf = integrate(f, dom, cfg)
    qg = integrate(g, dom, cfg)
    area = dom.area
    value = qfg.value / area - (qf.value / area) * (qg.value / area)
    err = (
        qfg.error_estimate / area
        + (abs(qf.value) * qg.error_estimate + abs(qg.value) * qf.error_estimate) / area**2
    )
    return QuadResult(
        value,
        err,
        qfg.panels_used + qf.panels_used + qg.panels_used,
        qfg.converged and qf.converged and qg.converged,
    )


def chebyshev_l2_bound(
    f: Expression,
    g: Expression,
    dom: RectDomain,
    variant: str = "as-stated",
    cfg: QuadConfig = DEFAULT_CONFIG,
    hypothesis: str = "weak",
) -> BoundReport:
    """|T(f,g)| <= (1/pi^4) * S * ||d2f/dxdy||_2 ||d2g/dxdy||_2.

    variant='as-stated' uses S = (b-a)^2 (d-c)^2; variant='area-variant' uses
    S = (b-a)(d-c), the scaling the mean-normalized derivation produces.  Both
    are exposed; neither is silently corrected.  Requires both weak sides on
    f and on g.
    """
    if variant not in ("as-stated", "area-variant"):
        raise ValueError(f"variant must be 'as-stated' or 'area-variant', got {variant!r}")
    T = chebyshev_functional(f, g, dom, cfg)
    nf2 = l2_norm_sq(mixed_partial(f), dom, cfg)
    ng2 = l2_norm_sq(mixed_partial(g), dom, cfg)
    nf, enf = _sqrt_with_err(nf2.value, nf2.error_estimate)
    ng, eng = _sqrt_with_err(ng2.value, ng2.error_estimate)
    scale = dom.width**2 * dom.height**2 if variant == "as-stated" else dom.area
    rhs = (scale / PI**4) * nf * ng
    eps = T.error_estimate + (scale / PI**4) * (enf * ng + nf * eng)
    sides = _sides(hypothesis, left=True, right=True)
    asm = _require(check_assumptions(f, dom, hypothesis), sides)
    asm_g = _require(check_assumptions(g, dom, hypothesis), sides)
    ineq = (
        InequalityId.CHEBYSHEV_L2 if variant == "as-stated"
        else InequalityId.CHEBYSHEV_L2_AREA_VARIANT
    )
    return _finalize(
        ineq, variant, abs(T.value), rhs, eps, asm,
        T.converged and nf2.converged and ng2.converged,
        _smooth_caveat(f, g), asm_g,
    )


def chebyshev_mixed_bound(
    f: Expression,
    g: Expression,
    dom: RectDomain,
    cfg: QuadConfig = DEFAULT_CONFIG,
    hypothesis: str = "weak",
    range_grid: int = 201,
) -> BoundReport:
    """|T(f,g)| <= (4/pi^2) sqrt(b-a) sqrt(d-c) (Gamma-gamma) ||d2f/dxdy||_2.

    gamma, Gamma are inner range estimates for g (grid sampling plus
    golden-section refinement), so the rhs is flagged as estimated.
    """
    T = chebyshev_functional(f, g, dom, cfg)
    nf2 = l2_norm_sq(mixed_partial(f), dom, cfg)
    nf, enf = _sqrt_with_err(nf2.value, nf2.error_estimate)
    rng = range_bounds(g, dom, range_grid)
    spread = rng.Gamma_est - rng.gamma_est
    coef = (4.0 / PI**2) * math.sqrt(dom.width) * math.sqrt(dom.height) * spread
    rhs = coef * nf
    eps = T.error_estimate + coef * enf
    asm = _require(
        check_assumptions(f, dom, hypothesis), _sides(hypothesis, left=True, right=True)
    )
    asm_g = AssumptionReport(
        mode="range",
        gamma=rng.gamma_est,
        Gamma=rng.Gamma_est,
        range_estimated=True,
        required=("range-bounded",),
        satisfied=True,
    )
    return _finalize(
        InequalityId.CHEBYSHEV_MIXED, None, abs(T.value), rhs, eps, asm,
        T.converged and nf2.converged,
        (CAVEAT_RANGE_ESTIMATED,) + _smooth_caveat(f), asm_g,
    )


def ostrowski_2d(
    f: Expression,
    dom: RectDomain,
    point: EvalPoint,
    cfg: QuadConfig = DEFAULT_CONFIG,
    hypothesis: str = "weak",
) -> BoundReport:
    """|f(point) - mean(f)| against the anchored bracket bound.

    rhs = (4 / (pi^2 sqrt(area))) [w/2 + |x - mid_x|] [h/2 + |y - mid_y|]
          * ||d2f/dxdy||_2; at the midpoint this collapses to
    (1/pi^2) sqrt(area) ||d2f/dxdy||_2.  The point may lie on the boundary.
    """
    if not (dom.a <= point.x <= dom.b and dom.c <= point.y <= dom.d):
        raise ValueError(f"point {point} must lie in the closed domain")
    qf = integrate(f, dom, cfg)
    mean = qf.value / dom.area
    lhs = abs(evaluate(f, point) - mean)
    nf2 = l2_norm_sq(mixed_partial(f), dom, cfg)
    nf, enf = _sqrt_with_err(nf2.value, nf2.error_estimate)
    bx = anchored_half_width(dom.a, dom.b, point.x)
    by = anchored_half_width(dom.c, dom.d, point.y)
    coef = 4.0 / (PI**2 * math.sqrt(dom.area)) * bx * by
    rhs = coef * nf
    eps = qf.error_estimate / dom.area + coef * enf
    asm = _require(
        check_assumptions(f, dom, hypothesis), _sides(hypothesis, left=True, right=True)
    )
    return _finalize(
        InequalityId.OSTROWSKI_2D, None, lhs, rhs, eps, asm,
        qf.converged and nf2.converged, _smooth_caveat(f),
    )


# ---------------------------------------------------------------------------
# 1D reference bounds (run on a degenerate strip of unit height)
# ---------------------------------------------------------------------------


def _strip(a: float, b: float) -> RectDomain:
    return RectDomain(a, b, 0.0, 1.0)


def _require_1d(f: Expression, name: str) -> None:
    if f.depends_on("y"):
        raise ValueError(f"{name} must depend on x only")


def diaz_metcalf_1d(
    f: Expression,
    interval: tuple[float, float],
    t: float,
    cfg: QuadConfig = DEFAULT_CONFIG,
) -> BoundReport:
    """int (f - f(t))^2 <= (4/pi^2) [(b-a)/2 + |t - (a+b)/2|]^2 int f'^2.

    The coincident-node case needs no boundary hypotheses, so assumption
    checking is trivially satisfied.
    """
    a, b = interval
    _require_1d(f, "f")
    if not a <= t <= b:
        raise ValueError(f"t={t} outside [{a}, {b}]")
    strip = _strip(a, b)
    ft = evaluate(f, EvalPoint(t, 0.0))
    shifted = Expression(Sub(f.root, Num(ft)), f.smooth)
    hint = EvalPoint(t, 0.5) if a < t < b else None
    lq = l2_norm_sq(shifted, strip, cfg, split_hints=hint)
    rq = l2_norm_sq(differentiate(f, "x"), strip, cfg, split_hints=hint)
    coef = (4.0 / PI**2) * anchored_half_width(a, b, t) ** 2
    rhs = coef * rq.value
    eps = lq.error_estimate + coef * rq.error_estimate
    return _finalize(
        InequalityId.DIAZ_METCALF_1D, None, lq.value, rhs, eps, _NO_ASSUMPTIONS,
        lq.converged and rq.converged, _smooth_caveat(f),
    )


def lupas_1d(
    f: Expression,
    g: Expression,
    interval: tuple[float, float],
    cfg: QuadConfig = DEFAULT_CONFIG,
) -> BoundReport:
    """|T1(f,g)| <= ((b-a)/pi^2) ||f'||_2 ||g'||_2 with the 1D mean functional."""
    a, b = interval
    _require_1d(f, "f")
    _require_1d(g, "g")
    strip = _strip(a, b)
    T = chebyshev_functional(f, g, strip, cfg)
    nf2 = l2_norm_sq(differentiate(f, "x"), strip, cfg)
    ng2 = l2_norm_sq(differentiate(g, "x"), strip, cfg)
    nf, enf = _sqrt_with_err(nf2.value, nf2.error_estimate)
    ng, eng = _sqrt_with_err(ng2.value, ng2.error_estimate)
    coef = (b - a) / PI**2
    rhs = coef * nf * ng
    eps = T.error_estimate + coef * (enf * ng + nf * eng)
    return _finalize(
        InequalityId.LUPAS_1D, None, abs(T.value), rhs, eps, _NO_ASSUMPTIONS,
        T.converged and nf2.converged and ng2.converged, _smooth_caveat(f, g),
    )
