"""Bound-operation tests: spec example values, hypothesis gating, algebra."""

import math

import pytest

from ineq2d.bounds import (
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
from ineq2d.bounds import _finalize  # status-rule unit checks
from ineq2d.expr import Add, EvalPoint, Expression, Num, parse
from ineq2d.quad import QuadConfig, RectDomain
from ineq2d.sharpness import compliant_family

PI = math.pi
UNIT = RectDomain(0.0, 1.0, 0.0, 1.0)
EXTREMAL = parse("sin(pi*x/2)*sin(pi*y/2)")


class TestCheckAssumptions:
    def test_extremal_weak_left(self):
        asm = check_assumptions(EXTREMAL, UNIT)
        assert asm.weak_left
        assert not asm.weak_right  # f(1,y) = sin(pi y/2) != 0

    def test_xy_strict_left_fails(self):
        asm = check_assumptions(parse("x*y"), UNIT, mode="strict")
        assert asm.weak_left
        assert asm.strict_left is False  # f_x(0,y) = y != 0

    def test_extremal_strict_left_fails_weak_holds(self):
        # the sharp witness itself is inadmissible under the strict reading
        asm = check_assumptions(EXTREMAL, UNIT, mode="strict")
        assert asm.weak_left and asm.strict_left is False

    def test_compliant_family_weak_both(self):
        for _, f in compliant_family(UNIT)[:4]:
            asm = check_assumptions(f, UNIT)
            assert asm.weak_left and asm.weak_right

    def test_mode_validation(self):
        with pytest.raises(ValueError):
            check_assumptions(parse("x"), UNIT, mode="loose")


class TestWirtinger:
    def test_extremal_sharp(self):
        r = wirtinger_2d(EXTREMAL, UNIT)
        assert r.lhs == pytest.approx(0.25, rel=1e-10)
        assert r.rhs == pytest.approx(0.25, rel=1e-10)
        assert r.ratio == pytest.approx(1.0, abs=1e-8)
        assert r.status == Status.HOLDS

    def test_xy(self):
        r = wirtinger_2d(parse("x*y"), UNIT)
        assert r.lhs == pytest.approx(1.0 / 9.0, rel=1e-12)
        assert r.rhs == pytest.approx(16.0 / PI**4, rel=1e-12)
        assert r.status == Status.HOLDS

    def test_zero_function(self):
        r = wirtinger_2d(parse("0"), UNIT)
        assert r.lhs == 0.0 and r.rhs == 0.0
        assert r.ratio is None
        assert r.status == Status.HOLDS

    def test_right_side_conditions(self):
        mirrored = parse("sin(pi*(1-x)/2)*sin(pi*(1-y)/2)")
        r = wirtinger_2d(mirrored, UNIT, side="right")
        assert r.status == Status.HOLDS and r.ratio == pytest.approx(1.0, abs=1e-8)
        assert wirtinger_2d(mirrored, UNIT, side="left").status == Status.ASSUMPTIONS_UNMET

    def test_side_validation(self):
        with pytest.raises(ValueError):
            wirtinger_2d(parse("x"), UNIT, side="中")


class TestPointwise:
    def test_constant(self):
        r = pointwise_2d(parse("3"), UNIT, EvalPoint(0.4, 0.6))
        assert r.lhs == pytest.approx(0.0, abs=1e-15)
        assert r.status == Status.HOLDS  # degenerate rhs=0 rule
        assert r.ratio is None

    def test_extremal_midpoint_anchor(self):
        r = pointwise_2d(EXTREMAL, UNIT, EvalPoint(0.5, 0.5))
        assert r.rhs == pytest.approx(1.0 / 64.0, rel=1e-10)
        assert r.lhs == pytest.approx(0.5 - 4.0 / PI**2, rel=1e-9)
        # not compliant on the right edges: recorded, not asserted
        assert r.status == Status.ASSUMPTIONS_UNMET
        assert r.ratio == pytest.approx((0.5 - 4.0 / PI**2) * 64.0, rel=1e-8)

    def test_bracket_minimal_at_midpoint(self):
        lo, hi = 0.0, 1.0
        mid_val = anchored_half_width(lo, hi, 0.5)
        ts = [0.05 * k for k in range(21)]
        assert all(anchored_half_width(lo, hi, t) >= mid_val for t in ts)
        assert max(anchored_half_width(lo, hi, t) for t in ts) == anchored_half_width(lo, hi, 0.0)
        assert anchored_half_width(lo, hi, 1.0) == hi - lo

    def test_anchor_must_be_interior(self):
        with pytest.raises(ValueError):
            pointwise_2d(parse("x"), UNIT, EvalPoint(0.0, 0.5))

    def test_anchor_line_diagnostics(self):
        r = pointwise_2d(parse("x*y"), UNIT, EvalPoint(0.5, 0.5))
        assert r.assumptions.anchor_line_residuals is not None
        rx, ry = r.assumptions.anchor_line_residuals
        # |f(0.5,y) - 0.25| peaks at y in {0,1}
        assert rx == pytest.approx(0.25, rel=1e-12)
        assert ry == pytest.approx(0.25, rel=1e-12)


class TestChebyshevFunctional:
    def test_constant_f(self):
        q = chebyshev_functional(parse("7"), parse("sin(x)*y"), UNIT)
        assert abs(q.value) <= max(q.error_estimate, 1e-14)

    def test_xy_xy(self):
        q = chebyshev_functional(parse("x*y"), parse("x*y"), UNIT)
        assert q.value == pytest.approx(7.0 / 144.0, abs=1e-12)

    def test_cos_sign_product(self):
        q = chebyshev_functional(
            parse("cos(pi*x)*cos(pi*y)"), parse("sgn(x-1/2)*sgn(y-1/2)"), UNIT
        )
        assert abs(q.value) == pytest.approx(4.0 / PI**2, rel=1e-12)

    def test_symmetry(self):
        f, g = parse("x^2*y"), parse("sin(pi*x)+y")
        a = chebyshev_functional(f, g, UNIT)
        b = chebyshev_functional(g, f, UNIT)
        assert abs(a.value - b.value) <= a.error_estimate + b.error_estimate + 1e-15

    def test_shift_invariance(self):
        f, g = parse("x*y^2"), parse("cos(pi*x)*y")
        base = chebyshev_functional(f, g, UNIT)
        for kappa in (-3.0, 1.0, 10.0):
            shifted = Expression(Add(f.root, Num(kappa)), f.smooth)
            q = chebyshev_functional(shifted, g, UNIT)
            tol = base.error_estimate + q.error_estimate + 1e-12 * (1 + abs(kappa))
            assert abs(q.value - base.value) <= tol

    def test_nonnegative_diagonal(self):
        for src in ("x*y", "sin(pi*x)*sin(pi*y)", "exp(x+y)", "sgn(x-1/2)"):
            q = chebyshev_functional(parse(src), parse(src), UNIT)
            assert q.value >= -(q.error_estimate + 1e-14)

    def test_cauchy_schwarz_chain(self):
        pairs = [
            ("x*y", "x+y"),
            ("sin(pi*x)*sin(pi*y)", "cos(pi*x)*cos(pi*y)"),
            ("exp(x)", "y^2"),
            ("x^2", "sgn(x-1/2)*sgn(y-1/2)"),
        ]
        for fs, gs in pairs:
            f, g = parse(fs), parse(gs)
            tfg = chebyshev_functional(f, g, UNIT)
            tff = chebyshev_functional(f, f, UNIT)
            tgg = chebyshev_functional(g, g, UNIT)
            rhs = math.sqrt(max(tff.value, 0.0) * max(tgg.value, 0.0))
            eps = tfg.error_estimate + tff.error_estimate + tgg.error_estimate + 1e-12
            assert abs(tfg.value) <= rhs + eps, (fs, gs)


class TestChebyshevL2:
    def test_center_wave_pair_as_stated_unit_square(self):
        f = parse("cos(pi*x)*cos(pi*y)")
        r = chebyshev_l2_bound(f, f, UNIT, variant="as-stated")
        assert r.lhs == pytest.approx(0.25, rel=1e-10)
        assert r.rhs == pytest.approx(0.25, rel=1e-10)
        assert r.ratio == pytest.approx(1.0, abs=1e-8)
        # the witness pair itself fails the edge-vanishing hypotheses
        assert r.status == Status.ASSUMPTIONS_UNMET

    def test_xy_pair(self):
        f = parse("x*y")
        r = chebyshev_l2_bound(f, f, UNIT)
        assert r.inequality == InequalityId.CHEBYSHEV_L2
        assert r.lhs == pytest.approx(7.0 / 144.0, abs=1e-12)
        assert r.rhs == pytest.approx(1.0 / PI**4, rel=1e-12)
        assert r.status == Status.ASSUMPTIONS_UNMET
        assert r.ratio == pytest.approx(7.0 * PI**4 / 144.0, rel=1e-10)

    def test_area_variant_rescales(self):
        dom = RectDomain(0.0, 0.5, 0.0, 0.5)
        f = parse("cos(2*pi*x)*cos(2*pi*y)")
        stated = chebyshev_l2_bound(f, f, dom, variant="as-stated")
        area = chebyshev_l2_bound(f, f, dom, variant="area-variant")
        assert area.inequality == InequalityId.CHEBYSHEV_L2_AREA_VARIANT
        assert stated.ratio == pytest.approx(4.0, rel=1e-8)
        assert area.ratio == pytest.approx(1.0, rel=1e-8)

    def test_compliant_pair_holds(self):
        f = parse("sin(pi*x)*sin(pi*y)")
        r = chebyshev_l2_bound(f, f, UNIT, variant="area-variant")
        assert r.status == Status.HOLDS

    def test_variant_validation(self):
        with pytest.raises(ValueError):
            chebyshev_l2_bound(parse("x"), parse("y"), UNIT, variant="best")


class TestChebyshevMixed:
    def test_constant_partner(self):
        f = parse("sin(pi*x)*sin(pi*y)")
        r = chebyshev_mixed_bound(f, parse("5"), UNIT)
        assert r.rhs == pytest.approx(0.0, abs=1e-12)
        assert r.lhs <= r.eps + 1e-12
        assert r.status == Status.HOLDS
        assert r.ratio is None

    def test_witness_pair_values(self):
        f = parse("cos(pi*x)*cos(pi*y)")
        g = parse("sgn(x-1/2)*sgn(y-1/2)")
        r = chebyshev_mixed_bound(f, g, UNIT)
        assert r.lhs == pytest.approx(4.0 / PI**2, rel=1e-10)
        assert r.rhs == pytest.approx(4.0, rel=1e-10)
        assert r.ratio == pytest.approx(1.0 / PI**2, rel=1e-8)
        assert r.status == Status.ASSUMPTIONS_UNMET  # f not edge-vanishing
        assert r.assumptions_g is not None
        assert r.assumptions_g.gamma == -1.0 and r.assumptions_g.Gamma == 1.0
        assert r.assumptions_g.range_estimated

    def test_xy_vs_x_plus_y(self):
        # closed form: T(xy, x+y) = 1/3 - (1/4)(1) = 1/12
        r = chebyshev_mixed_bound(parse("x*y"), parse("x+y"), UNIT)
        assert r.lhs == pytest.approx(1.0 / 12.0, abs=1e-12)
        assert r.rhs == pytest.approx(8.0 / PI**2, rel=1e-9)
        assert r.status == Status.ASSUMPTIONS_UNMET

    def test_range_caveat_flag(self):
        r = chebyshev_mixed_bound(parse("sin(pi*x)*sin(pi*y)"), parse("x"), UNIT)
        assert any("range estimated" in c for c in r.caveats)

    def test_range_deviation_bound(self):
        # mean-square deviation of g at most a quarter of the squared range
        for src in ("x+y", "sgn(x-1/2)*sgn(y-1/2)", "sin(pi*x)*sin(pi*y)", "x*y*4-1"):
            g = parse(src)
            tgg = chebyshev_functional(g, g, UNIT)
            from ineq2d.quad import range_bounds

            rng = range_bounds(g, UNIT)
            lim = 0.25 * (rng.Gamma_est - rng.gamma_est) ** 2
            assert tgg.value <= lim * (1.0 + 1e-6) + tgg.error_estimate, src


class TestOstrowski:
    def test_half_wave_product_midpoint(self):
        r = ostrowski_2d(EXTREMAL, UNIT, EvalPoint(0.5, 0.5))
        assert r.lhs == pytest.approx(abs(0.5 - 4.0 / PI**2), rel=1e-10)
        assert r.rhs == pytest.approx(0.125, rel=1e-10)
        assert r.ratio == pytest.approx(0.7577, abs=1e-4)

    def test_constant(self):
        r = ostrowski_2d(parse("9"), UNIT, EvalPoint(0.3, 0.3))
        assert r.lhs <= r.eps + 1e-13
        assert r.status == Status.HOLDS

    def test_xy_corner_probe(self):
        r = ostrowski_2d(parse("x*y"), UNIT, EvalPoint(1.0, 1.0))
        assert r.lhs == pytest.approx(0.75, rel=1e-12)
        assert r.rhs == pytest.approx(4.0 / PI**2, rel=1e-12)
        assert r.status == Status.ASSUMPTIONS_UNMET
        assert r.ratio == pytest.approx(1.851, abs=1e-3)

    def test_point_may_sit_on_boundary(self):
        r = ostrowski_2d(parse("sin(pi*x)*sin(pi*y)"), UNIT, EvalPoint(0.0, 0.0))
        assert r.status == Status.HOLDS

    def test_point_outside_rejected(self):
        with pytest.raises(ValueError):
            ostrowski_2d(parse("x"), UNIT, EvalPoint(1.5, 0.5))

    def test_known_midpoint_violations(self):
        # Genuine counterexamples: edge-vanishing functions satisfying the
        # attached (weak) hypotheses that still break the midpoint bound.
        r = ostrowski_2d(parse("sin(pi*x)*sin(pi*y)"), UNIT, EvalPoint(0.5, 0.5))
        assert r.status == Status.VIOLATED
        assert r.ratio == pytest.approx(2.0 - 8.0 / PI**2, rel=1e-9)  # 1.18943...
        rb = ostrowski_2d(
            parse("sin(pi*x)*sin(pi*y)*x*(1-x)*y*(1-y)"), UNIT, EvalPoint(0.5, 0.5)
        )
        assert rb.status == Status.VIOLATED
        assert rb.ratio == pytest.approx(1.4798904, rel=1e-6)


class TestDiazMetcalf:
    def test_quarter_wave_at_left_node(self):
        r = diaz_metcalf_1d(parse("sin(pi*x/2)"), (0.0, 1.0), 0.0)
        assert r.lhs == pytest.approx(0.5, rel=1e-12)
        assert r.rhs == pytest.approx(0.5, rel=1e-12)
        assert r.ratio == pytest.approx(1.0, abs=1e-10)
        assert r.status == Status.HOLDS

    def test_constant(self):
        r = diaz_metcalf_1d(parse("3"), (0.0, 1.0), 0.5)
        assert r.lhs <= 1e-14
        assert r.status == Status.HOLDS

    def test_identity_at_midnode(self):
        r = diaz_metcalf_1d(parse("x"), (0.0, 1.0), 0.5)
        assert r.lhs == pytest.approx(1.0 / 12.0, rel=1e-12)
        assert r.rhs == pytest.approx(1.0 / PI**2, rel=1e-12)
        assert r.ratio == pytest.approx(PI**2 / 12.0, rel=1e-10)

    def test_node_outside_rejected(self):
        with pytest.raises(ValueError):
            diaz_metcalf_1d(parse("x"), (0.0, 1.0), 2.0)

    def test_bivariate_input_rejected(self):
        with pytest.raises(ValueError):
            diaz_metcalf_1d(parse("x*y"), (0.0, 1.0), 0.5)


class TestLupas:
    def test_identity_pair(self):
        r = lupas_1d(parse("x"), parse("x"), (0.0, 1.0))
        assert r.lhs == pytest.approx(1.0 / 12.0, abs=1e-13)
        assert r.rhs == pytest.approx(1.0 / PI**2, rel=1e-12)
        assert r.status == Status.HOLDS

    def test_constant(self):
        r = lupas_1d(parse("4"), parse("x^2"), (0.0, 1.0))
        assert r.lhs <= r.eps + 1e-14

    def test_center_wave_sharp(self):
        f = parse("cos(pi*x)")
        r = lupas_1d(f, f, (0.0, 1.0))
        assert r.lhs == pytest.approx(0.5, rel=1e-12)
        assert r.rhs == pytest.approx(0.5, rel=1e-12)
        assert r.ratio == pytest.approx(1.0, abs=1e-10)


class TestCornerAverage:
    def test_corner_average_bound_on_family(self):
        # mean-square deviation from the corner average, constant 64/pi^4
        from ineq2d.expr import EvalPoint as P, evaluate, mixed_partial
        from ineq2d.quad import l2_norm_sq
        from ineq2d.expr import Expression, Num, Sub

        for _, f in compliant_family(UNIT)[:6]:
            corners = [P(0, 0), P(0, 1), P(1, 0), P(1, 1)]
            cavg = sum(evaluate(f, p) for p in corners) / 4.0
            lq = l2_norm_sq(Expression(Sub(f.root, Num(cavg)), f.smooth), UNIT)
            rq = l2_norm_sq(mixed_partial(f), UNIT)
            rhs = (64.0 / PI**4) * rq.value
            assert lq.value <= rhs * (1.0 + 1e-8) + lq.error_estimate + rq.error_estimate


class TestStatusRules:
    def test_zero_rhs_with_real_lhs_is_violated(self):
        from ineq2d.bounds import _NO_ASSUMPTIONS

        r = _finalize(InequalityId.WIRTINGER_2D, None, 0.5, 0.0, 1e-12, _NO_ASSUMPTIONS, True)
        assert r.status == Status.VIOLATED and r.ratio is None

    def test_zero_rhs_with_zero_lhs_holds(self):
        from ineq2d.bounds import _NO_ASSUMPTIONS

        r = _finalize(InequalityId.WIRTINGER_2D, None, 1e-13, 0.0, 1e-12, _NO_ASSUMPTIONS, True)
        assert r.status == Status.HOLDS and r.ratio is None

    def test_inconclusive_wins(self):
        from ineq2d.bounds import _NO_ASSUMPTIONS

        r = _finalize(InequalityId.WIRTINGER_2D, None, 1.0, 2.0, 0.0, _NO_ASSUMPTIONS, False)
        assert r.status == Status.INCONCLUSIVE

    def test_inconclusive_from_quadrature(self):
        cfg = QuadConfig(max_panels=16)
        r = wirtinger_2d(parse("step(x-1/3)*x*y"), UNIT, cfg=cfg)
        assert r.status == Status.INCONCLUSIVE
