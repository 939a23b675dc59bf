"""Deterministic adaptive tensor-product Gauss-Legendre cubature on rectangles.

Panels are refined largest-error-first; a panel's error indicator is the change
of its value under 2x2 subdivision.  The final sum runs in a fixed canonical
panel order (row-major by panel origin), and concurrent panel evaluation uses
an order-preserving map, so results are bit-identical for any worker count
(``INEQ2D_THREADS``, default: hardware parallelism).
"""

from __future__ import annotations

import heapq
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .expr import EvalPoint, Expression, Num, Pow

_EPS = 2.0**-52


@dataclass(frozen=True)
class RectDomain:
    """Rectangle [a,b] x [c,d] with strictly positive side lengths."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        for v in (self.a, self.b, self.c, self.d):
            if not math.isfinite(v):
                raise ValueError("domain endpoints must be finite")
        if not (self.a < self.b and self.c < self.d):
            raise ValueError(
                f"need a < b and c < d, got [{self.a},{self.b}]x[{self.c},{self.d}]"
            )

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def height(self) -> float:
        return self.d - self.c

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def midpoint(self) -> EvalPoint:
        return EvalPoint(0.5 * (self.a + self.b), 0.5 * (self.c + self.d))


@dataclass(frozen=True)
class QuadConfig:
    points: int = 20            # Gauss-Legendre points per axis per panel
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_panels: int = 4096
    initial_splits: int = 1     # uniform panels per axis before refinement

    def __post_init__(self) -> None:
        if self.points < 2:
            raise ValueError("points must be >= 2")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_panels < 1:
            raise ValueError("max_panels must be >= 1")
        if self.initial_splits < 1:
            raise ValueError("initial_splits must be >= 1")


DEFAULT_CONFIG = QuadConfig()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    panels_used: int
    converged: bool


@dataclass(frozen=True)
class RangeEstimate:
    """Inner range estimate: true min <= gamma_est and Gamma_est <= true max."""

    gamma_est: float
    Gamma_est: float
    grid: int


def worker_count() -> int:
    """Worker threads: INEQ2D_THREADS when set, else hardware parallelism."""
    env = os.environ.get("INEQ2D_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("INEQ2D_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def ordered_map(fn: Callable, items: list) -> list:
    """Map preserving input order; concurrent when more than one worker."""
    w = worker_count()
    if w <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(w, len(items))) as pool:
        return list(pool.map(fn, items))


@lru_cache(maxsize=8)
def _gl_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def gauss_legendre_panel(e: Expression, dom: RectDomain, n: int) -> float:
    """Single tensor Gauss-Legendre panel over the whole rectangle.

    Exact for x^p y^q with p, q <= 2n-1 (up to roundoff).
    """
    nodes, weights = _gl_rule(n)
    return _rule(e, dom.a, dom.b, dom.c, dom.d, nodes, weights)


def _rule(e, x0, x1, y0, y1, nodes, weights) -> float:
    xs = 0.5 * (x1 - x0) * (nodes + 1.0) + x0
    ys = 0.5 * (y1 - y0) * (nodes + 1.0) + y0
    vals = e(xs[:, None], ys[None, :])
    w = weights[:, None] * weights[None, :]
    return float(np.sum(w * vals) * (0.25 * (x1 - x0) * (y1 - y0)))


@dataclass(frozen=True)
class _Panel:
    x0: float
    x1: float
    y0: float
    y1: float
    quads: tuple[float, float, float, float]  # children values, (y, x) sorted
    value: float                              # sum of quads
    err: float

    @property
    def origin(self) -> tuple[float, float]:
        return (self.y0, self.x0)


def _make_panel(e, x0, x1, y0, y1, nodes, weights, coarse=None) -> _Panel:
    if coarse is None:
        coarse = _rule(e, x0, x1, y0, y1, nodes, weights)
    xm = 0.5 * (x0 + x1)
    ym = 0.5 * (y0 + y1)
    quads = (
        _rule(e, x0, xm, y0, ym, nodes, weights),
        _rule(e, xm, x1, y0, ym, nodes, weights),
        _rule(e, x0, xm, ym, y1, nodes, weights),
        _rule(e, xm, x1, ym, y1, nodes, weights),
    )
    value = quads[0] + quads[1] + quads[2] + quads[3]
    # a-posteriori indicator, floored at the roundoff of the panel sum
    err = abs(value - coarse) + _EPS * abs(value)
    return _Panel(x0, x1, y0, y1, quads, value, err)


def _axis_breaks(lo: float, hi: float, splits: int, force_mid: bool, hints) -> list[float]:
    pts = [lo + (hi - lo) * k / splits for k in range(splits + 1)]
    extra = []
    if force_mid:
        extra.append(0.5 * (lo + hi))
    for h in hints:
        if lo < h < hi:
            extra.append(h)
    tol = 1e-12 * (hi - lo)
    for v in extra:
        if min(abs(v - p) for p in pts) > tol:
            pts.append(v)
    return sorted(pts)


def integrate(
    e: Expression,
    dom: RectDomain,
    cfg: QuadConfig = DEFAULT_CONFIG,
    split_hints: EvalPoint | Iterable[EvalPoint] | None = None,
) -> QuadResult:
    """Adaptive integral of e over dom.

    Non-smooth integrands force initial splits along both domain midlines;
    split hints (e.g. an anchor point where a construction breaks) add panel
    boundaries through the hinted coordinates.
    """
    nodes, weights = _gl_rule(cfg.points)
    if split_hints is None:
        hints: list[EvalPoint] = []
    elif isinstance(split_hints, EvalPoint):
        hints = [split_hints]
    else:
        hints = list(split_hints)

    xbreaks = _axis_breaks(dom.a, dom.b, cfg.initial_splits, not e.smooth, [p.x for p in hints])
    ybreaks = _axis_breaks(dom.c, dom.d, cfg.initial_splits, not e.smooth, [p.y for p in hints])

    cells = [
        (x0, x1, y0, y1)
        for y0, y1 in zip(ybreaks, ybreaks[1:])
        for x0, x1 in zip(xbreaks, xbreaks[1:])
    ]

    workers = worker_count()
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def pmap(fn: Callable, items: list) -> list:
        if pool is None or len(items) <= 1:
            return [fn(it) for it in items]
        return list(pool.map(fn, items))

    try:
        panels: dict[tuple[float, float], _Panel] = {}
        heap: list[tuple[float, float, float]] = []
        running_val = 0.0
        running_err = 0.0

        def add(p: _Panel) -> None:
            nonlocal running_val, running_err
            panels[p.origin] = p
            heapq.heappush(heap, (-p.err, p.y0, p.x0))
            running_val += p.value
            running_err += p.err

        for p in pmap(lambda cell: _make_panel(e, *cell, nodes, weights), cells):
            add(p)

        while running_err > max(cfg.abs_tol, cfg.rel_tol * abs(running_val)):
            if len(panels) + 3 > cfg.max_panels or not heap:
                break
            _, y0, x0 = heapq.heappop(heap)
            p = panels.pop((y0, x0))
            running_val -= p.value
            running_err -= p.err
            xm = 0.5 * (p.x0 + p.x1)
            ym = 0.5 * (p.y0 + p.y1)
            child_cells = (
                (p.x0, xm, p.y0, ym, p.quads[0]),
                (xm, p.x1, p.y0, ym, p.quads[1]),
                (p.x0, xm, ym, p.y1, p.quads[2]),
                (xm, p.x1, ym, p.y1, p.quads[3]),
            )
            for child in pmap(
                lambda cc: _make_panel(e, cc[0], cc[1], cc[2], cc[3], nodes, weights, coarse=cc[4]),
                list(child_cells),
            ):
                add(child)
    finally:
        if pool is not None:
            pool.shutdown()

    # canonical reduction: row-major by panel origin
    ordered = [panels[k] for k in sorted(panels)]
    value = 0.0
    err = 0.0
    for p in ordered:
        value += p.value
        err += p.err
    converged = err <= max(cfg.abs_tol, cfg.rel_tol * abs(value))
    return QuadResult(value, err, len(ordered), converged)


def l2_norm_sq(
    e: Expression,
    dom: RectDomain,
    cfg: QuadConfig = DEFAULT_CONFIG,
    split_hints: EvalPoint | Iterable[EvalPoint] | None = None,
) -> QuadResult:
    """Integral of e^2 over dom."""
    squared = Expression(Pow(e.root, Num(2.0)), e.smooth)
    return integrate(squared, dom, cfg, split_hints)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_refine(f, xlo, xhi, ylo, yhi, x, y, sign, iters=30):
    """Coordinate-wise golden-section refinement; returns best evaluated value.

    Only evaluated points contribute, so the result never overshoots the true
    extremum (inner estimate).
    """
    best = (sign * float(f(x, y)), x, y)
    for _ in range(iters):
        p = xhi - _INVPHI * (xhi - xlo)
        q = xlo + _INVPHI * (xhi - xlo)
        fp, fq = sign * float(f(p, y)), sign * float(f(q, y))
        if fp >= fq:
            xhi, cand = q, (fp, p, y)
        else:
            xlo, cand = p, (fq, q, y)
        best = max(best, cand)
        x = cand[1]
        p = yhi - _INVPHI * (yhi - ylo)
        q = ylo + _INVPHI * (yhi - ylo)
        fp, fq = sign * float(f(x, p)), sign * float(f(x, q))
        if fp >= fq:
            yhi, cand = q, (fp, x, p)
        else:
            ylo, cand = p, (fq, x, q)
        best = max(best, cand)
        y = cand[1]
    return sign * best[0]


def range_bounds(e: Expression, dom: RectDomain, grid: int = 201) -> RangeEstimate:
    """Inner estimates of min/max of e over dom.

    Grid sampling refined by 30 coordinate-wise golden-section iterations in
    the cell surrounding each grid extremum.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    xs = np.linspace(dom.a, dom.b, grid)
    ys = np.linspace(dom.c, dom.d, grid)
    vals = np.asarray(e(xs[:, None], ys[None, :]))
    if vals.shape != (grid, grid):
        vals = np.broadcast_to(vals, (grid, grid))

    def refine(flat_idx: int, sign: float) -> float:
        i, j = divmod(int(flat_idx), grid)
        xlo, xhi = xs[max(i - 1, 0)], xs[min(i + 1, grid - 1)]
        ylo, yhi = ys[max(j - 1, 0)], ys[min(j + 1, grid - 1)]
        return _golden_refine(e, xlo, xhi, ylo, yhi, float(xs[i]), float(ys[j]), sign)

    gamma = min(float(vals.min()), refine(int(np.argmin(vals)), -1.0))
    Gamma = max(float(vals.max()), refine(int(np.argmax(vals)), +1.0))
    return RangeEstimate(gamma, Gamma, grid)


EDGES = ("x=a", "x=b", "y=c", "y=d")


def line_residual(e: Expression, dom: RectDomain, axis: str, at: float, samples: int = 257) -> float:
    """max |e| on the cross-section x=at (axis='x') or y=at (axis='y')."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if axis == "x":
        ts = np.linspace(dom.c, dom.d, samples)
        vals = e(np.float64(at), ts)
    elif axis == "y":
        ts = np.linspace(dom.a, dom.b, samples)
        vals = e(ts, np.float64(at))
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return float(np.max(np.abs(vals)))


def boundary_residual(e: Expression, dom: RectDomain, edge: str, samples: int = 257) -> float:
    """max |e| over equispaced samples along one domain edge."""
    if edge == "x=a":
        return line_residual(e, dom, "x", dom.a, samples)
    if edge == "x=b":
        return line_residual(e, dom, "x", dom.b, samples)
    if edge == "y=c":
        return line_residual(e, dom, "y", dom.c, samples)
    if edge == "y=d":
        return line_residual(e, dom, "y", dom.d, samples)
    raise ValueError(f"edge must be one of {EDGES}, got {edge!r}")
