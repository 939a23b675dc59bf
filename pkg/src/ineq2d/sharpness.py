"""Extremal witnesses, achieved ratios, and best-constant scans.

Each supported inequality ships the construction that attains (or comes
closest to) its constant: quarter-wave sine products for the corner-anchored
bounds, centered full waves for the mean-normalized ones, and a sign-product
partner for the range-based bound.  Scans evaluate a function family over a
domain list and report the implied best-possible constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bounds import (
    BoundReport,
    InequalityId,
    Status,
    chebyshev_l2_bound,
    chebyshev_mixed_bound,
    diaz_metcalf_1d,
    lupas_1d,
    ostrowski_2d,
    pointwise_2d,
    wirtinger_2d,
)
from .expr import (
    Add,
    Call,
    Const,
    Div,
    EvalPoint,
    Expression,
    Mul,
    Node,
    Num,
    Sub,
    Var,
    from_root,
    parse,
)
from .quad import DEFAULT_CONFIG, QuadConfig, RectDomain, ordered_map

PI = math.pi

_PAIR_TARGETS = (
    InequalityId.CHEBYSHEV_L2,
    InequalityId.CHEBYSHEV_L2_AREA_VARIANT,
    InequalityId.CHEBYSHEV_MIXED,
    InequalityId.LUPAS_1D,
)


@dataclass(frozen=True)
class ExtremalSpec:
    """Recipe for an extremal witness.

    anchor is required for the anchored pointwise bound (strictly interior)
    and doubles as the node t for the 1D coincident-node bound (t = anchor.x,
    defaulting to the left endpoint).  k0 offsets the anchored construction;
    k1..k4 weight its four subrectangle pieces (k0=0 makes it vanish at the
    anchor).  Frequencies are pi / (2 * side length) per active piece.
    """

    target: InequalityId
    domain: RectDomain
    side: str = "left"
    amplitude: float = 1.0
    anchor: EvalPoint | None = None
    k0: float = 0.0
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0
    k4: float = 1.0

    def __post_init__(self) -> None:
        if self.amplitude == 0.0:
            raise ValueError("amplitude must be nonzero")
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")


# ---------------------------------------------------------------------------
# AST builders
# ---------------------------------------------------------------------------

_X = Var("x")
_Y = Var("y")


def _half_pi_of(numer: Node, span: float) -> Node:
    # sin(pi/2 * numer / span)
    return Call("sin", Mul(Div(Const("pi"), Num(2.0)), Div(numer, Num(span))))


def _quarter_wave(var: Node, zero_at: float, one_at: float) -> Node:
    """sin(pi/2 (v - zero)/(one - zero)): 0 at zero_at, +-1 at one_at."""
    return _half_pi_of(Sub(var, Num(zero_at)), one_at - zero_at)


def _center_wave(var: Node, lo: float, hi: float) -> Node:
    """sin(pi/2 (lo+hi-2v)/(hi-lo)): +1 at lo, 0 at the midpoint, -1 at hi."""
    return _half_pi_of(Sub(Num(lo + hi), Mul(Num(2.0), var)), hi - lo)


def _scaled(node: Node, c: float) -> Node:
    return node if c == 1.0 else Mul(Num(c), node)


def _product(*nodes: Node) -> Node:
    out = nodes[0]
    for n in nodes[1:]:
        out = Mul(out, n)
    return out


def _step_of(node: Node) -> Node:
    return Call("step", node)


def _anchored_patchwork(spec: ExtremalSpec) -> Expression:
    """Four quarter-wave pieces around the anchor, gated into one expression.

    Each piece vanishes on the cross-lines through the anchor, so the sum is
    continuous and equals k0 there.  Constant unit-step selectors keep only
    the pieces living on the wider side of each axis (both survive when the
    anchor sits on a midline), which is what attains the bracket bound.
    Regional gates use step(xi - x) and its complement, so every point
    belongs to exactly one piece (single-valued on the seams).
    """
    dom, anchor = spec.domain, spec.anchor
    assert anchor is not None
    xi, eta = anchor.x, anchor.y
    tau = 2.0 * xi - dom.a - dom.b
    psi = 2.0 * eta - dom.c - dom.d

    left_x = _quarter_wave(_X, xi, dom.a)
    right_x = _quarter_wave(_X, xi, dom.b)
    bottom_y = _quarter_wave(_Y, eta, dom.c)
    top_y = _quarter_wave(_Y, eta, dom.d)

    in_left = _step_of(Sub(Num(xi), _X))
    in_right = Sub(Num(1.0), _step_of(Sub(Num(xi), _X)))
    in_bottom = _step_of(Sub(Num(eta), _Y))
    in_top = Sub(Num(1.0), _step_of(Sub(Num(eta), _Y)))

    sel = lambda v: _step_of(Num(v))  # noqa: E731  (constant 0/1 selector)
    pieces = (
        _product(Num(spec.k1), left_x, bottom_y, sel(tau), sel(psi), in_left, in_bottom),
        _product(Num(spec.k2), right_x, bottom_y, sel(-tau), sel(psi), in_right, in_bottom),
        _product(Num(spec.k3), left_x, top_y, sel(tau), sel(-psi), in_left, in_top),
        _product(Num(spec.k4), right_x, top_y, sel(-tau), sel(-psi), in_right, in_top),
    )
    total: Node = pieces[0]
    for p in pieces[1:]:
        total = Add(total, p)
    return from_root(Add(Num(spec.k0), _scaled(total, spec.amplitude)))


def _node_1d_witness(spec: ExtremalSpec) -> Expression:
    """Widest-side quarter wave vanishing at the node t (1D, x only)."""
    dom = spec.domain
    a, b = dom.a, dom.b
    t = spec.anchor.x if spec.anchor is not None else a
    if not a <= t <= b:
        raise ValueError(f"node t={t} outside [{a}, {b}]")
    if t == a:
        root = _quarter_wave(_X, a, b)
    elif t == b:
        root = _quarter_wave(_X, b, a)
    elif b - t >= t - a:
        root = Mul(_quarter_wave(_X, t, b), _step_of(Sub(_X, Num(t))))
    else:
        root = Mul(_quarter_wave(_X, t, a), _step_of(Sub(Num(t), _X)))
    return from_root(_scaled(root, spec.amplitude))


def build_extremal(spec: ExtremalSpec) -> Expression | tuple[Expression, Expression]:
    """Construct the extremal witness (a pair for the two-function bounds)."""
    dom = spec.domain
    target = spec.target
    if target == InequalityId.WIRTINGER_2D:
        if spec.side == "left":
            root = Mul(_quarter_wave(_X, dom.a, dom.b), _quarter_wave(_Y, dom.c, dom.d))
        else:
            root = Mul(_quarter_wave(_X, dom.b, dom.a), _quarter_wave(_Y, dom.d, dom.c))
        return from_root(_scaled(root, spec.amplitude))
    if target == InequalityId.POINTWISE_2D:
        if spec.anchor is None:
            raise ValueError("anchored construction needs an anchor")
        if not (dom.a < spec.anchor.x < dom.b and dom.c < spec.anchor.y < dom.d):
            raise ValueError(f"anchor {spec.anchor} must be strictly inside the domain")
        return _anchored_patchwork(spec)
    if target in (InequalityId.CHEBYSHEV_L2, InequalityId.CHEBYSHEV_L2_AREA_VARIANT):
        root = Mul(_center_wave(_X, dom.a, dom.b), _center_wave(_Y, dom.c, dom.d))
        f = from_root(_scaled(root, spec.amplitude))
        return f, f
    if target == InequalityId.CHEBYSHEV_MIXED:
        root = Mul(_center_wave(_X, dom.a, dom.b), _center_wave(_Y, dom.c, dom.d))
        f = from_root(_scaled(root, spec.amplitude))
        g = from_root(
            Mul(
                Call("sgn", Sub(_X, Num(0.5 * (dom.a + dom.b)))),
                Call("sgn", Sub(_Y, Num(0.5 * (dom.c + dom.d)))),
            )
        )
        return f, g
    if target == InequalityId.DIAZ_METCALF_1D:
        return _node_1d_witness(spec)
    if target == InequalityId.LUPAS_1D:
        f = from_root(_scaled(_center_wave(_X, dom.a, dom.b), spec.amplitude))
        return f, f
    raise ValueError(f"no extremal construction for {target.value}")


# ---------------------------------------------------------------------------
# Achieved ratios and scans
# ---------------------------------------------------------------------------


def run_bound(
    ineq: InequalityId,
    variant: str | None,
    f: Expression,
    g: Expression | None,
    dom: RectDomain,
    cfg: QuadConfig,
    anchor: EvalPoint | None = None,
    t: float | None = None,
    side: str = "left",
    hypothesis: str = "weak",
) -> BoundReport:
    """Dispatch to the matching bound operation."""
    if ineq == InequalityId.WIRTINGER_2D:
        return wirtinger_2d(f, dom, side=side, cfg=cfg, hypothesis=hypothesis)
    if ineq == InequalityId.POINTWISE_2D:
        if anchor is None:
            raise ValueError("pointwise2d needs an anchor")
        return pointwise_2d(f, dom, anchor, cfg=cfg, hypothesis=hypothesis)
    if ineq in (InequalityId.CHEBYSHEV_L2, InequalityId.CHEBYSHEV_L2_AREA_VARIANT):
        if g is None:
            raise ValueError(f"{ineq.value} needs two functions")
        var = variant or (
            "area-variant" if ineq == InequalityId.CHEBYSHEV_L2_AREA_VARIANT else "as-stated"
        )
        return chebyshev_l2_bound(f, g, dom, variant=var, cfg=cfg, hypothesis=hypothesis)
    if ineq == InequalityId.CHEBYSHEV_MIXED:
        if g is None:
            raise ValueError("chebyshev-mixed needs two functions")
        return chebyshev_mixed_bound(f, g, dom, cfg=cfg, hypothesis=hypothesis)
    if ineq == InequalityId.OSTROWSKI_2D:
        point = anchor if anchor is not None else dom.midpoint
        return ostrowski_2d(f, dom, point, cfg=cfg, hypothesis=hypothesis)
    if ineq == InequalityId.DIAZ_METCALF_1D:
        return diaz_metcalf_1d(f, (dom.a, dom.b), dom.a if t is None else t, cfg=cfg)
    if ineq == InequalityId.LUPAS_1D:
        if g is None:
            raise ValueError("lupas-1d needs two functions")
        return lupas_1d(f, g, (dom.a, dom.b), cfg=cfg)
    raise ValueError(f"unknown inequality {ineq!r}")


def achieved_ratio(
    spec: ExtremalSpec, variant: str | None = None, cfg: QuadConfig = DEFAULT_CONFIG
) -> float:
    """Build the extremal for spec and return lhs/rhs of the matching bound."""
    built = build_extremal(spec)
    f, g = built if isinstance(built, tuple) else (built, None)
    t = spec.anchor.x if spec.anchor is not None else None
    report = run_bound(
        spec.target, variant, f, g, spec.domain, cfg,
        anchor=spec.anchor, t=t, side=spec.side,
    )
    if report.ratio is None:
        raise ArithmeticError("degenerate extremal: rhs is zero")
    return report.ratio


# the constant factored out of each rhs (midpoint form for the mean-deviation bound)
NOMINAL_CONSTANTS: dict[InequalityId, float] = {
    InequalityId.WIRTINGER_2D: 16.0 / PI**4,
    InequalityId.POINTWISE_2D: 16.0 / PI**4,
    InequalityId.CHEBYSHEV_L2: 1.0 / PI**4,
    InequalityId.CHEBYSHEV_L2_AREA_VARIANT: 1.0 / PI**4,
    InequalityId.CHEBYSHEV_MIXED: 4.0 / PI**2,
    InequalityId.OSTROWSKI_2D: 1.0 / PI**2,
    InequalityId.DIAZ_METCALF_1D: 4.0 / PI**2,
    InequalityId.LUPAS_1D: 1.0 / PI**2,
}


@dataclass(frozen=True)
class ScanRow:
    domain: tuple[float, float, float, float]
    fid: str
    gid: str | None
    lhs: float
    rhs: float
    ratio: float | None
    eps: float
    status: Status


@dataclass(frozen=True)
class ScanResult:
    """Scan outcome.  Rows with unmet assumptions (or inconclusive quadrature)
    stay in rows but are excluded from max_ratio/constant_estimate."""

    inequality: InequalityId
    variant: str | None
    rows: tuple[ScanRow, ...]
    functions: dict[str, str]  # fid -> source text
    max_ratio: float | None
    constant_estimate: float | None


def _normalize_family(
    family: list[Expression] | list[tuple[str, Expression]],
) -> list[tuple[str, Expression]]:
    out: list[tuple[str, Expression]] = []
    for i, entry in enumerate(family):
        if isinstance(entry, tuple):
            out.append(entry)
        else:
            out.append((f"f{i:02d}", entry))
    return out


def constant_scan(
    ineq: InequalityId,
    variant: str | None,
    family: list[Expression] | list[tuple[str, Expression]],
    domains: list[RectDomain],
    cfg: QuadConfig = DEFAULT_CONFIG,
) -> ScanResult:
    """Evaluate the bound on every (function, domain) pair plus the extremal.

    The implied constant estimate is the paper constant times the largest
    ratio over rows whose hypotheses hold and whose quadrature converged.
    Two-function bounds scan diagonal pairs (f, f) plus the extremal pair.
    Anchored/point bounds use the quarter point / the midpoint respectively.
    """
    if not family or not domains:
        raise ValueError("family and domains must be nonempty")
    named = _normalize_family(family)
    pair = ineq in _PAIR_TARGETS
    side = variant if ineq == InequalityId.WIRTINGER_2D and variant in ("left", "right") else "left"

    tasks: list[tuple[RectDomain, str, Expression, str | None, Expression | None]] = []
    legend: dict[str, str] = {}
    for dom in domains:
        for fid, fe in named:
            legend.setdefault(fid, str(fe))
            tasks.append((dom, fid, fe, fid if pair else None, fe if pair else None))
        try:
            built = build_extremal(
                ExtremalSpec(
                    target=ineq, domain=dom, side=side, anchor=_scan_anchor(ineq, dom)
                )
            )
        except ValueError:
            built = None  # no construction for this inequality
        if built is not None:
            ef, eg = built if isinstance(built, tuple) else (built, None)
            legend.setdefault("extremal", str(ef))
            if eg is not None:
                legend.setdefault("extremal-g", str(eg))
            tasks.append((dom, "extremal", ef, "extremal-g" if eg is not None else None, eg))

    def run(task) -> ScanRow:
        dom, fid, fe, gid, ge = task
        report = run_bound(
            ineq, variant, fe, ge, dom, cfg, anchor=_scan_anchor(ineq, dom), side=side
        )
        return ScanRow(
            (dom.a, dom.b, dom.c, dom.d), fid, gid,
            report.lhs, report.rhs, report.ratio, report.eps, report.status,
        )

    rows = tuple(ordered_map(run, tasks))
    rated = [r.ratio for r in rows if r.ratio is not None]
    eligible = [
        r.ratio
        for r in rows
        if r.ratio is not None and r.status in (Status.HOLDS, Status.VIOLATED)
    ]
    max_ratio = max(rated) if rated else None
    k = NOMINAL_CONSTANTS[ineq]
    estimate = k * max(eligible) if eligible else None
    return ScanResult(ineq, variant, rows, legend, max_ratio, estimate)


def _scan_anchor(ineq: InequalityId, dom: RectDomain) -> EvalPoint | None:
    if ineq == InequalityId.POINTWISE_2D:
        # quarter point: safely away from the midline where the bracket is minimal
        return EvalPoint(dom.a + 0.25 * dom.width, dom.c + 0.25 * dom.height)
    if ineq == InequalityId.OSTROWSKI_2D:
        return dom.midpoint
    return None


# ---------------------------------------------------------------------------
# Compliant smooth families
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    r = repr(float(v))
    return f"({r})" if r.startswith("-") else r


def compliant_family(dom: RectDomain) -> list[tuple[str, Expression]]:
    """18 smooth functions vanishing on all four edges of dom.

    sin(j pi (x-a)/w) sin(k pi (y-c)/h) for 1 <= j,k <= 3, plus the same
    multiplied by the polynomial bubble (x-a)(b-x)(y-c)(d-y).
    """
    a, b, c, d = dom.a, dom.b, dom.c, dom.d
    w, h = dom.width, dom.height
    bubble = f"(x - {_fmt(a)})*({_fmt(b)} - x)*(y - {_fmt(c)})*({_fmt(d)} - y)"
    out: list[tuple[str, Expression]] = []
    for j in range(1, 4):
        for k in range(1, 4):
            src = (
                f"sin({j}*pi*(x - {_fmt(a)})/{_fmt(w)})"
                f"*sin({k}*pi*(y - {_fmt(c)})/{_fmt(h)})"
            )
            out.append((f"s{j}{k}", parse(src)))
    for j in range(1, 4):
        for k in range(1, 4):
            src = (
                f"sin({j}*pi*(x - {_fmt(a)})/{_fmt(w)})"
                f"*sin({k}*pi*(y - {_fmt(c)})/{_fmt(h)})*{bubble}"
            )
            out.append((f"s{j}{k}b", parse(src)))
    return out


def compliant_family_1d(interval: tuple[float, float]) -> list[tuple[str, Expression]]:
    """6 smooth x-only functions vanishing at both interval endpoints."""
    a, b = interval
    w = b - a
    out: list[tuple[str, Expression]] = []
    for j in range(1, 4):
        out.append((f"u{j}", parse(f"sin({j}*pi*(x - {_fmt(a)})/{_fmt(w)})")))
    for j in range(1, 4):
        src = f"sin({j}*pi*(x - {_fmt(a)})/{_fmt(w)})*(x - {_fmt(a)})*({_fmt(b)} - x)"
        out.append((f"u{j}b", parse(src)))
    return out
