import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from curvelab import Point2, canonical_graph, curvature_at, make_curve
from curvelab.construction import chord_endpoints
from curvelab.curve import _project
from curvelab.errors import BadParameter, NonConvex, OffCurve


def fd_curvature(curve, u, step=1e-4):
    """Curvature from central differences of world positions (independent of the closed forms)."""
    p = [np.array(tuple(curve.point_at(u + k * step))) for k in (-1, 0, 1)]
    d1 = (p[2] - p[0]) / (2 * step)
    d2 = (p[2] - 2 * p[1] + p[0]) / step**2
    return (d1[0] * d2[1] - d1[1] * d2[0]) / np.hypot(*d1) ** 3


def test_point_rejects_non_finite():
    with pytest.raises(BadParameter):
        Point2(math.nan, 0.0)


def test_parabola_canonical_position():
    c = make_curve("parabola", a=0, b=1)
    for w in (-1.5, 0.0, 0.3, 2.0):
        p = c.point_at(w)
        assert (p.x, p.y) == pytest.approx((w, w * w / 2))


def test_circle_curvature_is_constant():
    c = make_curve("circle", r=1)
    for u in np.linspace(-3, 3, 13):
        assert curvature_at(c, float(u)) == pytest.approx(1.0, rel=1e-14)


def test_bad_parameters():
    with pytest.raises(BadParameter):
        make_curve("parabola", a=0, b=0)
    with pytest.raises(BadParameter):
        make_curve("circle", r=-1)
    with pytest.raises(BadParameter):
        make_curve("ellipse", p=1, q=0)
    with pytest.raises(BadParameter):
        make_curve("cosh", domain=(1.0, 1.0))
    with pytest.raises(BadParameter):
        make_curve("hyperbola")


def test_non_convex_graph_rejected():
    with pytest.raises(NonConvex):
        make_curve(
            "graph",
            f=lambda x: x**4 - x**2,
            df=lambda x: 4 * x**3 - 2 * x,
            d2f=lambda x: 12 * x**2 - 2,
            domain=(-0.1, 0.1),
        )


def test_curvature_examples():
    assert curvature_at(make_curve("circle", r=2), Point2(2.0, 2.0)) == pytest.approx(0.5)
    par = make_curve("parabola", a=0, b=1)
    assert curvature_at(par, Point2(0.0, 0.0)) == pytest.approx(1.0)
    expected = 2 ** -1.5
    assert curvature_at(par, Point2(1.0, 0.5)) == pytest.approx(expected, rel=1e-12)
    assert fd_curvature(par, 1.0) == pytest.approx(expected, rel=1e-6)


def test_off_curve_point():
    with pytest.raises(OffCurve):
        curvature_at(make_curve("circle", r=1), Point2(0.0, 0.1))


def test_circle_graph_value():
    g = canonical_graph(make_curve("circle", r=1), Point2(0.0, 0.0))
    # oracle: lower branch of x^2 + (y - 1)^2 = 1 at x = 0.6
    y = brentq(lambda y: 0.36 + (y - 1) ** 2 - 1, 0.0, 0.9)
    assert g.f(0.6) == pytest.approx(y, abs=1e-14)
    assert y == pytest.approx(0.2)


def test_parabola_vertex_graph_is_identity_frame():
    g = canonical_graph(make_curve("parabola", a=0, b=1), 0.0)
    for x in (-1.3, -0.2, 0.5, 2.0):
        assert g.f(x) == pytest.approx(x * x / 2, rel=1e-14)
    assert g.to_world(0.5, 0.125) == Point2(0.5, 0.125)


def test_tilted_parabola_derivatives():
    g = canonical_graph(make_curve("parabola", a=1, b=1), 0.0)
    assert g.d2f(0.0) == pytest.approx(1.0, rel=1e-14)
    assert g.d3f(0.0) == pytest.approx(-3.0, rel=1e-14)


def test_ellipse_vertex_curvatures():
    c = make_curve("ellipse", p=2, q=1)
    # q / p^2 at the ends of the y semi-axis, p / q^2 at the ends of the x semi-axis
    assert curvature_at(c, 0.0) == pytest.approx(0.25)
    assert curvature_at(c, math.pi / 2) == pytest.approx(2.0)
    assert fd_curvature(c, math.pi / 2) == pytest.approx(2.0, rel=1e-6)


def _models():
    return {
        "parabola": make_curve("parabola", a=-0.8, b=0.6, rotation=0.4, shift=(1.0, -2.0)),
        "circle": make_curve("circle", r=1.7, rotation=2.0, shift=(-3.0, 0.5)),
        "ellipse": make_curve("ellipse", p=2, q=1, rotation=-1.0),
        "cosh": make_curve("cosh", rotation=0.3, shift=(0.2, 0.2)),
    }


@pytest.mark.parametrize("name", ["parabola", "circle", "ellipse", "cosh"])
def test_frame_round_trip(name):
    curve = _models()[name]
    rng = np.random.default_rng(11)
    lo, hi = curve.chart.natural
    worst = 0.0
    for u0 in rng.uniform(lo, hi, 20):
        g = canonical_graph(curve, float(u0))
        xl, xr = chord_endpoints(g, 0.9 * g.reference_height)
        for x in np.linspace(xl, xr, 15):
            Q = g.to_world(float(x), g.f(float(x)))
            qx, qy = curve.placement.inverse_apply(Q.x, Q.y)
            worst = max(worst, _project(curve.chart, qx, qy)[1])
    assert worst < 1e-10


@pytest.mark.parametrize("name", ["parabola", "circle", "ellipse", "cosh"])
def test_curvature_consistency_and_convexity_guard(name):
    curve = _models()[name]
    rng = np.random.default_rng(5)
    lo, hi = curve.chart.natural
    for u0 in rng.uniform(lo, hi, 20):
        g = canonical_graph(curve, float(u0))
        assert g.f(0.0) == 0.0
        assert abs(g.df(0.0)) < 1e-15
        assert abs(g.d2f(0.0) - curvature_at(curve, float(u0))) < 1e-9
        assert g.d2f(0.0) == pytest.approx(fd_curvature(curve, float(u0)), rel=1e-5)
        xl, xr = g.x_range
        xs = np.linspace(xl, xr, 102)[1:-1]
        assert all(g.d2f(float(x)) > 0 for x in xs)


def test_conic_membership():
    rng = np.random.default_rng(3)
    for a, b in zip(rng.uniform(-3, 3, 5), 10 ** rng.uniform(-1, 1, 5)):
        c = make_curve("parabola", a=a, b=b)
        for w in np.linspace(-2 * b, 2 * b, 100):
            x, y = c.point_at(float(w))
            assert abs(c.chart.implicit(x, y)) < 1e-12 * (1 + b * b)


def test_world_point_resolves_to_parameter():
    c = make_curve("ellipse", p=2, q=1, rotation=0.7, shift=(3, 4))
    P = c.point_at(0.4)
    g1, g2 = canonical_graph(c, P), canonical_graph(c, 0.4)
    assert g1.u0 == pytest.approx(g2.u0, abs=1e-12)
    assert g1.kappa == pytest.approx(g2.kappa, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 10), st.floats(-1.5, 1.5), st.floats(0, 6.28))
def test_rigid_motion_keeps_curvature(a, b, s, angle):
    base = make_curve("parabola", a=a, b=b)
    moved = base.moved(angle, (2.0, -7.0))
    u = s * b
    assert curvature_at(moved, u) == pytest.approx(curvature_at(base, u), rel=1e-12)
    P, Q = base.point_at(u), moved.point_at(u)
    assert math.hypot(Q.x - 2.0, Q.y + 7.0) == pytest.approx(math.hypot(P.x, P.y), rel=1e-12, abs=1e-12)
