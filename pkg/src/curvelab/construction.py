"""The chord / tangent-triangle figure at ``(P, h)`` and its measures.

In the canonical frame at ``P`` the line ``y = h`` cuts the curve at
``A1 = (s, h)`` and ``A2 = (t, h)`` with ``s < 0 < t``. The tangents there
meet the base tangent (the x-axis) at ``B1`` and ``B2`` and each other at
``B``. The measured quantities are

* ``L = |A1 A2|`` and ``ell = |B1 B2|``,
* ``T`` = area of triangle ``P A1 A2`` (``= h L / 2``),
* ``U`` = area of triangle ``B B1 B2``, ``V`` = area of triangle ``B A1 A2``,
* ``W`` = area of trapezoid ``A1 A2 B2 B1`` (so ``V = W + U``),
* ``S`` = area between the arc ``A1 A2`` and its chord.

All lengths and areas come from the frame abscissas and the exact tangent
slopes ``f'(s)``, ``f'(t)``; no secant approximations are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .curve import CurveModel, LocalGraph, Point2, canonical_graph
from .errors import DegenerateFigure, HeightOutOfRange, NoApexInWindow, OffCurve
from .numerics import adaptive_simpson, grow_bracket, safeguarded_newton

# heights below this multiple of scale^2 * kappa leave s, t unrepresentable
DEGENERATE_HEIGHT = 1e-14


@dataclass(frozen=True)
class Figure:
    graph: LocalGraph
    h: float
    s: float
    t: float
    v_s: float  # chart parameters of A1, A2 relative to P
    v_t: float
    slope_s: float
    slope_t: float
    P: Point2
    A1: Point2
    A2: Point2
    B: Point2
    B1: Point2
    B2: Point2

    def frame_points(self) -> dict:
        """The six labelled points in the canonical frame of ``P``."""
        h, s, t, fs, ft = self.h, self.s, self.t, self.slope_s, self.slope_t
        x0, y0 = _apex_of_tangents(s, t, fs, ft, h)
        return {
            "A": (0.0, 0.0),
            "A1": (s, h),
            "A2": (t, h),
            "B": (x0, y0),
            "B1": (s - h / fs, 0.0),
            "B2": (t - h / ft, 0.0),
        }


@dataclass(frozen=True)
class Measures:
    h: float
    L: float
    ell: float
    T: float
    U: float
    V: float
    W: float
    S: float
    alpha: float

    def ratios(self) -> dict:
        return {
            "r_ST": self.S / self.T,
            "r_SV": self.S / self.V,
            "r_SW": self.S / self.W,
            "r_UT": self.U / self.T,
            "r_ellL": self.ell / self.L,
        }


def _apex_of_tangents(s, t, fs, ft, h):
    x0 = (t * ft - s * fs) / (ft - fs)
    y0 = ((t - s) * ft * fs + h * (ft - fs)) / (ft - fs)
    return x0, y0


def _check_height(g: LocalGraph, h: float):
    if not (math.isfinite(h) and h > 0):
        raise HeightOutOfRange(f"height must be positive, got {h}")
    floor = DEGENERATE_HEIGHT * g.chart.scale**2 * g.kappa
    if h <= floor:
        raise HeightOutOfRange(f"height {h:.3g} below the representable floor {floor:.3g}")
    if h >= g.height_range:
        raise HeightOutOfRange(f"height {h:.6g} reaches the working range {g.height_range:.6g}")


def _chord_params(g: LocalGraph, h: float):
    _check_height(g, h)
    speed = math.hypot(*g.chart.d1(g.u0))
    guess = math.sqrt(2.0 * h / g.kappa) / speed

    def height(v):
        return g.frame_xy(v)[1] - h

    def slope(v):
        return g.frame_d1(v)[1]

    out = []
    for limit in (g.v_hi, g.v_lo):
        sign = 1.0 if limit > 0 else -1.0
        bracket = grow_bracket(lambda w: height(sign * w), 0.0, 0.5 * guess, abs(limit))
        if bracket is None:
            raise HeightOutOfRange(f"line y = {h:.6g} leaves the working interval before meeting the curve")
        lo, hi = bracket
        w = safeguarded_newton(lambda w: height(sign * w), lambda w: sign * slope(sign * w), lo, hi)
        out.append(sign * w)
    v_t, v_s = out
    return v_s, v_t


def chord_endpoints(g: LocalGraph, h: float):
    """Frame abscissas ``(s, t)``, ``s < 0 < t``, where ``y = h`` meets the curve."""
    v_s, v_t = _chord_params(g, h)
    return float(g.frame_xy(v_s)[0]), float(g.frame_xy(v_t)[0])


def build_figure(curve: CurveModel, P, h: float, graph: LocalGraph | None = None) -> Figure:
    """Construct the chord and the three tangent lines at ``(P, h)``.

    ``graph`` may pass a precomputed canonical graph at ``P``.
    """
    g = graph if graph is not None else canonical_graph(curve, P)
    v_s, v_t = _chord_params(g, h)
    s = float(g.frame_xy(v_s)[0])
    t = float(g.frame_xy(v_t)[0])
    xs1, ys1 = g.frame_d1(v_s)
    xt1, yt1 = g.frame_d1(v_t)
    fs, ft = float(ys1 / xs1), float(yt1 / xt1)
    if not (fs < 0 < ft) or not (math.isfinite(fs) and math.isfinite(ft)):
        raise DegenerateFigure(f"tangent slopes f'(s) = {fs}, f'(t) = {ft} do not straddle zero")
    x0, y0 = _apex_of_tangents(s, t, fs, ft, h)
    return Figure(
        graph=g,
        h=float(h),
        s=s,
        t=t,
        v_s=float(v_s),
        v_t=float(v_t),
        slope_s=fs,
        slope_t=ft,
        P=g.P,
        A1=g.to_world(s, h),
        A2=g.to_world(t, h),
        B=g.to_world(x0, y0),
        B1=g.to_world(s - h / fs, 0.0),
        B2=g.to_world(t - h / ft, 0.0),
    )


def sector_area(g: LocalGraph, h: float, tol: float = 1e-10, max_evals: int = 1_000_000) -> float:
    """Area between the arc and the chord at height ``h``.

    Evaluates ``int_s^t (h - f(x)) dx`` after the substitution ``x = x(v)``
    along the chart, which removes the need to invert ``x(v)`` per sample.
    """
    v_s, v_t = _chord_params(g, h)

    def integrand(v):
        y = g.frame_xy(v)[1]
        dx = g.frame_d1(v)[0]
        return (h - y) * dx

    return float(adaptive_simpson(integrand, v_s, v_t, tol=tol, max_evals=max_evals))


def measure(fig: Figure, S: float) -> Measures:
    """Lengths and areas of ``fig``; ``S`` comes from :func:`sector_area`."""
    s, t, h = fig.s, fig.t, fig.h
    fs, ft = fig.slope_s, fig.slope_t
    if fs == 0.0 or ft == 0.0 or ft == fs:
        raise DegenerateFigure("a chord tangent is parallel to the base tangent")
    L = t - s
    gap = (ft - fs) / (fs * ft)  # negative for a convex figure
    ell = L + gap * h
    V = 0.5 * (-fs * ft / (ft - fs)) * L * L
    W = h * L + 0.5 * gap * h * h
    U = V - W
    T = 0.5 * h * L
    alpha = -gap * math.sqrt(h)
    return Measures(h=h, L=L, ell=ell, T=T, U=U, V=V, W=W, S=float(S), alpha=alpha)


def triangle_area(p: Point2, q: Point2, r: Point2) -> float:
    return 0.5 * abs((q.x - p.x) * (r.y - p.y) - (r.x - p.x) * (q.y - p.y))


def tangent_triangle_area(fig: Figure) -> float:
    """``U`` straight from the vertices ``B, B1, B2`` (cross-check for :func:`measure`)."""
    return triangle_area(fig.B, fig.B1, fig.B2)


def measure_at(curve: CurveModel, P, h: float, tol: float = 1e-10, graph: LocalGraph | None = None):
    """Figure and measures at one cell, with the quadrature tolerance tied to the cell size."""
    fig = build_figure(curve, P, h, graph=graph)
    cell_tol = min(tol, tol * h * (fig.t - fig.s))
    S = sector_area(fig.graph, h, tol=cell_tol)
    return fig, measure(fig, S)


def apex_for_chord(curve: CurveModel, A1: Point2, A2: Point2) -> Point2:
    """The point between ``A1`` and ``A2`` whose tangent is parallel to the chord."""
    if A1.distance(A2) == 0.0:
        raise NoApexInWindow("A1 and A2 coincide")
    if curve.fit is not None:
        return _apex_in_frame(curve, A1, A2)
    # analytic curves: solve cross(X'(u), A2 - A1) = 0 along the global chart
    chart, motion, u1 = curve.resolve(A1)
    _, _, u2 = curve.resolve(A2)
    d = motion.inverse_apply(A2.x, A2.y)
    o = motion.inverse_apply(A1.x, A1.y)
    dx, dy = d[0] - o[0], d[1] - o[1]

    def cross(u):
        x1, y1 = chart.d1(u)
        return x1 * dy - y1 * dx

    def dcross(u):
        x2, y2 = chart.d2(u)
        return x2 * dy - y2 * dx

    lo, hi = min(u1, u2), max(u1, u2)
    if lo == hi or (cross(lo) > 0) == (cross(hi) > 0):
        raise NoApexInWindow("tangent direction never matches the chord between A1 and A2")
    u = safeguarded_newton(cross, dcross, lo, hi)
    return Point2(*motion.apply(*chart.position(u)))


def _apex_in_frame(curve: CurveModel, A1: Point2, A2: Point2) -> Point2:
    # sampled curves only have local charts, so work in the frame at A1
    g1 = canonical_graph(curve, A1)
    x2, y2 = g1.to_frame(A2)
    if not (g1.x_range[0] <= x2 <= g1.x_range[1]):
        raise NoApexInWindow("A2 lies outside the working interval around A1")
    v2 = g1.param_of(x2)
    fx, fy = g1.frame_xy(v2)
    tol = 1e-9 * (1.0 + curve.scale) + 10.0 * (curve.noise or 0.0)
    if math.hypot(fx - x2, fy - y2) > tol:
        raise OffCurve(f"A2 = ({A2.x}, {A2.y}) is not on the curve")
    if v2 == 0.0:
        raise NoApexInWindow("A1 and A2 coincide")

    def cross(v):
        dx, dy = g1.frame_d1(v)
        return dx * fy - dy * fx

    def dcross(v):
        ddx, ddy = g1.frame_d2(v)
        return ddx * fy - ddy * fx

    lo, hi = (0.0, v2) if v2 > 0 else (v2, 0.0)
    if (cross(lo) > 0) == (cross(hi) > 0):
        raise NoApexInWindow("tangent direction never matches the chord between A1 and A2")
    v = safeguarded_newton(cross, dcross, lo, hi)
    x, y = g1.frame_xy(v)
    return g1.to_world(float(x), float(y))


def apex_abscissa(g: LocalGraph, t: float) -> float:
    """Root ``x`` of ``t f'(x) = f(t)`` between 0 and ``t``.

    With ``g`` the canonical graph at ``A1`` and ``A2 = (t, f(t))``, this is
    the abscissa of the point whose tangent is parallel to ``A1 A2``.
    """
    if t == 0.0:
        raise NoApexInWindow("t must be non-zero")
    slope = g.f(t) / t
    lo, hi = (0.0, t) if t > 0 else (t, 0.0)
    return safeguarded_newton(lambda x: g.df(x) - slope, g.d2f, lo, hi)


def endpoint_triangle_area(g: LocalGraph, t: float) -> float:
    """Area of triangle ``B A1 A2`` with ``A1`` at the origin of ``g``.

    ``B`` is where the base tangent meets the tangent at ``A2 = (t, f(t))``,
    so the area is ``eps f(t) (t - f(t)/f'(t)) / 2`` with ``eps = sign(t)``.
    """
    ft, dft = g.f(t), g.df(t)
    eps = 1.0 if t > 0 else -1.0
    return eps * 0.5 * ft * (t - ft / dft)
