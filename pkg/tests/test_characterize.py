import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvelab import canonical_graph, detect_parabola, make_curve, measure_at, ratio_profile, reconstruct_parabola
from curvelab.characterize import RelativeHeights, geometric_heights, ode_residuals, power_law_fit, power_laws
from curvelab.curve import CurveModel, GraphChart
from curvelab.errors import EmptyGrid, InsufficientSpread, MissingThirdDerivative, NonPositiveSample, SingularAtOrigin

from conftest import random_parabolas

PARABOLA = {"r_ST": 4 / 3, "r_SV": 2 / 3, "r_SW": 8 / 9, "r_UT": 0.5, "r_ellL": 0.5}


def test_parabola_profile_rows():
    c = make_curve("parabola", a=0, b=1)
    table = ratio_profile(c, c.parameter_grid(5), geometric_heights(0.5, 5))
    assert len(table.rows) == 25
    for row in table.rows:
        assert row.ratios == pytest.approx(PARABOLA, rel=1e-8)


def test_profile_row_order():
    c = make_curve("circle", r=1)
    table = ratio_profile(c, [0.1, -0.2], [0.01, 0.2, 0.05])
    assert [(r.p_id, r.h) for r in table.rows] == [(0, 0.2), (0, 0.05), (0, 0.01), (1, 0.2), (1, 0.05), (1, 0.01)]


def test_circle_ratio_deviation():
    table = ratio_profile(make_curve("circle", r=1), [0.0], [0.5])
    r = table.rows[0].ratios
    assert r["r_UT"] == pytest.approx(4 / 3, rel=1e-12)
    assert r["r_UT"] - 0.5 == pytest.approx(0.8333333333, abs=1e-9)


def test_small_h_ratios_approach_constants():
    c = make_curve("ellipse", p=2, q=1)
    for h in (1e-2, 1e-4, 1e-6):
        ratios = ratio_profile(c, [0.3], [h]).rows[0].ratios
        for k, v in ratios.items():
            assert abs(v - PARABOLA[k]) < 5 * math.sqrt(h)


def test_profile_skips_bad_cells():
    c = make_curve("circle", r=1)
    table = ratio_profile(c, [0.0], [0.5, 3.0])
    reasons = {r.h: r.skip_reason for r in table.rows}
    assert reasons == {3.0: "HeightOutOfRange", 0.5: None}
    assert len(table.valid_rows()) == 1


def test_empty_grids():
    c = make_curve("circle", r=1)
    with pytest.raises(EmptyGrid):
        ratio_profile(c, [], [0.1])
    with pytest.raises(EmptyGrid):
        ratio_profile(c, [0.0], [])


def test_rotated_parabola_detected():
    c = make_curve("parabola", a=1, b=2, rotation=0.8, shift=(3, -1))
    v = detect_parabola(ratio_profile(c, c.parameter_grid(5), RelativeHeights(0.5, 5)), tol=1e-6)
    assert v.is_parabola
    assert all(v.theorem_verdicts.values())
    assert max(v.max_deviation.values()) < 1e-8


def test_circle_not_detected_and_worst_family():
    c = make_curve("circle", r=1)
    v = detect_parabola(ratio_profile(c, c.parameter_grid(4), geometric_heights(0.3, 5)), tol=1e-6)
    assert not v.is_parabola
    assert v.worst_family == "r_UT"
    assert v.witness["r_UT"][1] == pytest.approx(0.3)


def test_single_tiny_height_is_insufficient():
    c = make_curve("circle", r=1)
    with pytest.raises(InsufficientSpread):
        detect_parabola(ratio_profile(c, [0.0, 0.5], [1e-6]), tol=1e-6)
    with pytest.raises(InsufficientSpread):
        detect_parabola(ratio_profile(c, [0.0], [1e-6, 2e-6, 4e-6]), tol=1e-6)


def test_verdict_iff_all_families_within_tolerance():
    c = make_curve("cosh")
    table = ratio_profile(c, c.parameter_grid(3), RelativeHeights(0.5, 4))
    v = detect_parabola(table, tol=1e-6)
    worst = max(v.max_deviation[k] for k in ("r_ST", "r_SV", "r_SW", "r_UT"))
    loose = detect_parabola(table, tol=worst * 1.01)
    tight = detect_parabola(table, tol=worst * 0.99)
    assert loose.is_parabola and not tight.is_parabola


def test_auto_tolerance_for_analytic_curves():
    c = make_curve("ellipse", p=2, q=1)
    v = detect_parabola(ratio_profile(c, c.parameter_grid(3), RelativeHeights(0.5, 4)), tol="auto")
    assert v.tolerance == 1e-6
    assert v.tolerance_policy.startswith("analytic")


def test_soundness_on_random_parabolas():
    for a, b in random_parabolas():
        c = make_curve("parabola", a=a, b=b)
        v = detect_parabola(ratio_profile(c, c.parameter_grid(4), RelativeHeights(0.5, 4)), tol=1e-6)
        assert v.is_parabola, (a, b)


@pytest.mark.parametrize("curve", [
    make_curve("circle", r=1),
    make_curve("ellipse", p=2, q=1),
    make_curve("cosh"),
], ids=["circle", "ellipse", "cosh"])
def test_discrimination_and_theorem_consistency(curve):
    # largest height at 0.1 of the working range, as the discrimination property requires
    points = curve.parameter_grid(5)
    rows = []
    for P in points:
        g = canonical_graph(curve, P)
        rows.append(g.height_range)
    h_top = 0.1 * min(rows)
    v = detect_parabola(ratio_profile(curve, points, geometric_heights(h_top, 4)), tol=1e-3)
    assert not v.is_parabola
    assert set(v.theorem_verdicts.values()) == {False}


def test_lambda_constancy_on_parabola():
    c = make_curve("parabola", a=-2, b=0.5)
    v = detect_parabola(ratio_profile(c, c.parameter_grid(5), RelativeHeights(0.5, 4)), tol=1e-6)
    for fam in ("r_SV", "r_UT", "r_SW"):
        assert v.lambda_spread[fam] < 1e-10
        for lam in v.lambda_by_point[fam].values():
            assert lam == pytest.approx(PARABOLA[fam], rel=1e-9)


def test_reconstruct_vertex_parabola():
    g = canonical_graph(make_curve("parabola", a=0, b=1), 0.0)
    conic = reconstruct_parabola(g)
    assert (conic.a, conic.b) == pytest.approx((0.0, 1.0), abs=1e-14)
    assert conic.implicit == pytest.approx((1, 0, 0, 0, -2, 0))
    assert conic.is_parabola


def test_reconstruct_tilted_parabola():
    conic = reconstruct_parabola(canonical_graph(make_curve("parabola", a=1, b=1), 0.0))
    assert (conic.a, conic.b) == pytest.approx((1.0, 1.0), rel=1e-12)


def test_reconstruct_round_trip_random():
    for a, b in random_parabolas():
        curve = make_curve("parabola", a=a, b=b, rotation=0.3, shift=(1, 1))
        conic = reconstruct_parabola(canonical_graph(curve, 0.0))
        assert conic.a == pytest.approx(a, rel=1e-6, abs=1e-12)
        assert conic.b == pytest.approx(b, rel=1e-6)
        assert conic.residual < 1e-8 * conic.scale**2


def test_reconstruct_world_conic_contains_curve():
    curve = make_curve("parabola", a=0.5, b=1.5, rotation=1.1, shift=(-2, 3))
    conic = reconstruct_parabola(canonical_graph(curve, 0.7))
    A, B, C, D, E, F = conic.world
    for w in np.linspace(-2, 2, 9):
        P = curve.point_at(float(w))
        val = A * P.x**2 + B * P.x * P.y + C * P.y**2 + D * P.x + E * P.y + F
        assert abs(val) < 1e-9 * (1 + abs(F))


def test_reconstruct_circle_flags_non_parabola():
    conic = reconstruct_parabola(canonical_graph(make_curve("circle", r=1), 0.0))
    assert (conic.a, conic.b) == pytest.approx((0.0, 1.0), abs=1e-12)
    assert not conic.is_parabola


def test_reconstruct_needs_third_derivative():
    chart = GraphChart(lambda x: x * x / 2, lambda x: x, lambda x: 1.0 + 0 * x, domain=(-1, 1))
    g = canonical_graph(CurveModel("graph", {}, chart), 0.0)
    with pytest.raises(MissingThirdDerivative):
        reconstruct_parabola(g)


def test_graph_ode_on_parabola_and_circle():
    g = canonical_graph(make_curve("parabola", a=0, b=1), 0.0)
    rep = ode_residuals(g, np.linspace(0.1, 1.0, 10))
    assert rep.graph_ode_residual < 1e-12
    assert rep.first_integral_constant == pytest.approx(0.0, abs=1e-12)
    circle = canonical_graph(make_curve("circle", r=1), 0.0)
    t = 0.5
    f, f1, f2 = 1 - math.sqrt(1 - t * t), t / math.sqrt(1 - t * t), (1 - t * t) ** -1.5
    oracle = abs(2 * f * f * f2 - f1 * f1 * (t * f1 - f))
    rep = ode_residuals(circle, [t])
    assert rep.graph_ode_residual == pytest.approx(oracle, rel=1e-10)
    assert rep.graph_ode_residual > 1e-3


def test_first_integral_constant_is_axis_tilt():
    g = canonical_graph(make_curve("parabola", a=1.7, b=0.8), 0.0)
    rep = ode_residuals(g)
    assert rep.first_integral_constant == pytest.approx(1.7, rel=1e-10)
    assert rep.first_integral_residual < 1e-9


def test_graph_ode_singular_at_origin():
    g = canonical_graph(make_curve("parabola", a=0, b=1), 0.0)
    with pytest.raises(SingularAtOrigin):
        ode_residuals(g, [0.0, 0.5])


def test_euler_fit_exact_solutions():
    hs = [1e-1 * 4.0**-k for k in range(6)]
    rep = ode_residuals([(h, 3 * math.sqrt(h)) for h in hs])
    assert rep.C1 == pytest.approx(3.0, abs=1e-12)
    assert rep.C2 == pytest.approx(0.0, abs=1e-12)
    assert rep.euler_residual < 1e-10
    rep = ode_residuals([(h, math.sqrt(h) * (1 - 0.5 * math.log(h))) for h in hs])
    assert (rep.C1, rep.C2) == pytest.approx((1.0, -0.5), abs=1e-10)


def test_euler_fit_needs_five_samples():
    with pytest.raises(InsufficientSpread):
        ode_residuals([(1e-2, 0.1)] * 4)


def test_power_law_exact():
    lam, mu = power_law_fit([(b, 5 * b * b) for b in (0.1, 1.0, 10.0, 100.0)])
    assert (lam, mu) == pytest.approx((5.0, 2.0), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 100), st.floats(-3, 3))
def test_power_law_property(lam, mu):
    got = power_law_fit([(b, lam * b**mu) for b in np.geomspace(1e-3, 1e2, 7)])
    assert got == pytest.approx((lam, mu), rel=1e-9, abs=1e-9)


def test_power_law_guards():
    with pytest.raises(NonPositiveSample):
        power_law_fit([(1, 1), (10, -1), (100, 1)])
    with pytest.raises(InsufficientSpread):
        power_law_fit([(1, 1), (10, 1)])
    with pytest.raises(InsufficientSpread):
        power_law_fit([(1, 1), (5, 1), (50, 1)])


def test_power_laws_on_parabola():
    c = make_curve("parabola", a=0.4, b=2)
    cells = [measure_at(c, 0.5, h)[1] for h in np.geomspace(1e-6, 1e-1, 8)]
    laws = power_laws(cells)
    assert laws["S~V"] == pytest.approx((2 / 3, 1.0), abs=1e-8)
    assert laws["U~T"] == pytest.approx((0.5, 1.0), abs=1e-8)
    assert laws["S~W"] == pytest.approx((8 / 9, 1.0), abs=1e-8)


def test_rigid_motion_invariance_of_ratios():
    rng = np.random.default_rng(9)
    for base in (make_curve("ellipse", p=2, q=1), make_curve("cosh"), make_curve("parabola", a=1, b=0.5)):
        moved = base.moved(float(rng.uniform(0, 2 * math.pi)), tuple(rng.uniform(-10, 10, 2)))
        ps = base.parameter_grid(4)
        hs = geometric_heights(0.05, 4)
        t0, t1 = ratio_profile(base, ps, hs), ratio_profile(moved, ps, hs)
        for r0, r1 in zip(t0.rows, t1.rows):
            for k in PARABOLA:
                assert abs(r0.ratios[k] - r1.ratios[k]) < 1e-10
