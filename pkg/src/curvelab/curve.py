"""Strictly convex plane curves and the canonical local-graph frame.

A curve is described by a *chart*: a regular parametrization ``u -> X(u)``
with closed-form derivatives up to third order, always oriented so that the
curve turns left (``X' x X'' > 0``). The convex-side normal is then the left
normal ``J T``, and the canonical frame at a point ``P`` is the proper rigid
motion sending ``P`` to the origin, the unit tangent to ``+x`` and the
convex-side normal to ``+y``. In that frame the curve is locally ``y = f(x)``
with ``f(0) = f'(0) = 0`` and ``f''(0) = kappa(P)``.

Charts also expose :meth:`Chart.frame_offset`, the frame coordinates of
``X(u0 + d)`` relative to ``X(u0)``. The analytic families implement it in
closed form, which keeps the small heights ``y ~ kappa d^2 / 2`` free of the
cancellation a plain ``X(u0 + d) - X(u0)`` would suffer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import BadParameter, NonConvex, OffCurve, OutOfDomain, WindowTooSmall
from .numerics import grow_bracket, safeguarded_newton

MEMBERSHIP_RTOL = 1e-9


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise BadParameter(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def distance(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class RigidMotion:
    """Rotation by ``angle`` (radians, counter-clockwise) followed by ``shift``."""

    angle: float = 0.0
    shift: tuple = (0.0, 0.0)

    def rotate(self, vx, vy):
        c, s = math.cos(self.angle), math.sin(self.angle)
        return c * vx - s * vy, s * vx + c * vy

    def apply(self, px, py):
        rx, ry = self.rotate(px, py)
        return rx + self.shift[0], ry + self.shift[1]

    def inverse_apply(self, px, py):
        c, s = math.cos(self.angle), math.sin(self.angle)
        dx, dy = px - self.shift[0], py - self.shift[1]
        return c * dx + s * dy, -s * dx + c * dy

    def then(self, outer: "RigidMotion") -> "RigidMotion":
        """The motion ``outer . self``."""
        sx, sy = outer.apply(*self.shift)
        return RigidMotion(self.angle + outer.angle, (sx, sy))


IDENTITY = RigidMotion()


# --------------------------------------------------------------------------
# charts


class Chart:
    """Left-turning regular parametrization with derivatives up to order 3."""

    domain: tuple = (-math.inf, math.inf)
    natural: tuple = (-1.0, 1.0)
    scale: float = 1.0
    has_third: bool = True

    def position(self, u):
        raise NotImplementedError

    def d1(self, u):
        raise NotImplementedError

    def d2(self, u):
        raise NotImplementedError

    def d3(self, u):
        raise NotImplementedError

    def frame_offset(self, u0, d):
        """Coordinates of ``X(u0 + d) - X(u0)`` along (T, J T) at ``u0``."""
        x0, y0 = self.position(u0)
        x1, y1 = self.position(u0 + d)
        tx, ty = _unit(*self.d1(u0))
        dx, dy = x1 - x0, y1 - y0
        return tx * dx + ty * dy, -ty * dx + tx * dy

    def curvature(self, u):
        x1, y1 = self.d1(u)
        x2, y2 = self.d2(u)
        return (x1 * y2 - y1 * x2) / np.hypot(x1, y1) ** 3


def _unit(x, y):
    n = math.hypot(x, y)
    return x / n, y / n


class ParabolaChart(Chart):
    """``(x - a y)^2 = 2 b y`` parametrized by ``w = x - a y``."""

    def __init__(self, a: float, b: float, domain=(-1e3, 1e3)):
        self.a, self.b = float(a), float(b)
        self.domain = domain
        self.natural = (-2.0 * self.b, 2.0 * self.b)
        self.scale = self.b

    def position(self, w):
        y = w * w / (2.0 * self.b)
        return w + self.a * y, y

    def d1(self, w):
        return 1.0 + self.a * w / self.b, w / self.b

    def d2(self, w):
        return self.a / self.b + 0.0 * w, 1.0 / self.b + 0.0 * w

    def d3(self, w):
        return 0.0 * w, 0.0 * w

    def frame_offset(self, w0, d):
        a, b = self.a, self.b
        n = math.hypot(1.0 + a * w0 / b, w0 / b)
        along = d * ((1.0 + a * w0 / b) * (1.0 + a * (2.0 * w0 + d) / (2.0 * b)) + (w0 / b) * (2.0 * w0 + d) / (2.0 * b))
        return along / n, d * d / (2.0 * b * n)

    def implicit(self, x, y):
        a, b = self.a, self.b
        return x * x - 2.0 * a * x * y + a * a * y * y - 2.0 * b * y


class CircleChart(Chart):
    """Circle of radius ``r`` centred at ``(0, r)``; ``u = 0`` is the bottom point."""

    def __init__(self, r: float):
        self.r = float(r)
        self.domain = (-math.pi, math.pi)
        self.natural = (-0.5 * math.pi, 0.5 * math.pi)
        self.scale = self.r

    def position(self, t):
        return self.r * np.sin(t), self.r - self.r * np.cos(t)

    def d1(self, t):
        return self.r * np.cos(t), self.r * np.sin(t)

    def d2(self, t):
        return -self.r * np.sin(t), self.r * np.cos(t)

    def d3(self, t):
        return -self.r * np.cos(t), -self.r * np.sin(t)

    def frame_offset(self, t0, d):
        half = np.sin(0.5 * d)
        return self.r * np.sin(d), 2.0 * self.r * half * half


class EllipseChart(Chart):
    """Ellipse with semi-axes ``p`` (along x) and ``q`` (along y), centred at ``(0, q)``."""

    def __init__(self, p: float, q: float):
        self.p, self.q = float(p), float(q)
        self.domain = (-math.pi, math.pi)
        self.natural = (-0.5 * math.pi, 0.5 * math.pi)
        self.scale = max(self.p, self.q)

    def position(self, t):
        return self.p * np.sin(t), self.q - self.q * np.cos(t)

    def d1(self, t):
        return self.p * np.cos(t), self.q * np.sin(t)

    def d2(self, t):
        return -self.p * np.sin(t), self.q * np.cos(t)

    def d3(self, t):
        return -self.p * np.cos(t), -self.q * np.sin(t)

    def frame_offset(self, t0, d):
        p, q = self.p, self.q
        c0, s0 = math.cos(t0), math.sin(t0)
        n = math.hypot(p * c0, q * s0)
        half = np.sin(0.5 * d)
        cm, sm = np.cos(t0 + 0.5 * d), np.sin(t0 + 0.5 * d)
        along = 2.0 * half * (p * p * c0 * cm + q * q * s0 * sm) / n
        return along, 2.0 * p * q * half * half / n


class GraphChart(Chart):
    """Graph ``y = F(u)`` of a function with ``F'' > 0``.

    ``rise(u0, d)`` may supply ``F(u0 + d) - F(u0) - d F'(u0)`` without
    cancellation; otherwise it is formed by subtraction.
    """

    def __init__(self, f, df, d2f, d3f=None, domain=(-1.0, 1.0), rise=None, natural=None):
        self.f, self.df, self.d2f, self.d3f = f, df, d2f, d3f
        self.rise = rise
        self.has_third = d3f is not None
        lo, hi = float(domain[0]), float(domain[1])
        self.domain = (lo, hi)
        if natural is None:
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            natural = (mid - 0.5 * half, mid + 0.5 * half)
        self.natural = natural
        self.scale = hi - lo

    def position(self, u):
        return u, self.f(u)

    def d1(self, u):
        return 1.0 + 0.0 * u, self.df(u)

    def d2(self, u):
        return 0.0 * u, self.d2f(u)

    def d3(self, u):
        if self.d3f is None:
            raise OutOfDomain("third derivative not supplied for this graph")
        return 0.0 * u, self.d3f(u)

    def frame_offset(self, u0, d):
        s = self.df(u0)
        n = math.hypot(1.0, s)
        dy = self.f(u0 + d) - self.f(u0)
        r = self.rise(u0, d) if self.rise is not None else dy - d * s
        return (d + s * dy) / n, r / n


class PolynomialGraphChart(GraphChart):
    """Graph of a polynomial; the rise is summed exactly from its Taylor coefficients."""

    def __init__(self, coeffs, domain):
        self.poly = np.polynomial.Polynomial(coeffs)
        self.d3_error = None  # error estimate for the third derivative at 0, set by fitted models
        derivs = [self.poly.deriv(k) for k in (1, 2, 3)]
        super().__init__(self.poly, derivs[0], derivs[1], derivs[2], domain=domain, natural=domain)

    def frame_offset(self, u0, d):
        taylor = [self.poly.deriv(k)(u0) / math.factorial(k) for k in range(self.poly.degree() + 1)]
        s = taylor[1]
        n = math.hypot(1.0, s)
        r = sum(c * d**k for k, c in enumerate(taylor) if k >= 2)
        dy = d * s + r
        return (d + s * dy) / n, r / n


def _sinh_minus_x(d):
    if abs(d) < 0.1:
        d2 = d * d
        return d * d2 / 6.0 * (1.0 + d2 / 20.0 * (1.0 + d2 / 42.0 * (1.0 + d2 / 72.0)))
    return math.sinh(d) - d


def cosh_chart(domain=(-2.0, 2.0)) -> GraphChart:
    """Graph of ``cosh(u) - 1`` with a cancellation-free rise."""

    def rise(u0, d):
        half = math.sinh(0.5 * d)
        return math.cosh(u0) * 2.0 * half * half + math.sinh(u0) * _sinh_minus_x(d)

    return GraphChart(
        lambda u: np.cosh(u) - 1.0,
        np.sinh,
        np.cosh,
        np.sinh,
        domain=domain,
        rise=rise,
    )


# --------------------------------------------------------------------------
# curve models


@dataclass(frozen=True)
class CurveModel:
    """An analytic or sampled strictly convex curve.

    ``kind`` is one of ``parabola``, ``circle``, ``ellipse``, ``graph``,
    ``sampled``. Analytic kinds carry a global ``chart``; sampled curves carry
    a ``fit`` object that produces a local chart around each query point.
    """

    kind: str
    params: dict
    chart: Optional[Chart] = None
    placement: RigidMotion = IDENTITY
    fit: object = None

    @property
    def scale(self) -> float:
        if self.fit is not None:
            return self.fit.scale
        return self.chart.scale

    @property
    def noise(self) -> Optional[float]:
        return None if self.fit is None else self.fit.noise

    def moved(self, angle: float = 0.0, shift=(0.0, 0.0)) -> "CurveModel":
        return replace(self, placement=self.placement.then(RigidMotion(angle, tuple(shift))))

    def point_at(self, u: float) -> Point2:
        """World point for a chart parameter (sample index for sampled curves)."""
        if self.fit is not None:
            return Point2(*self.placement.apply(*self.fit.sample(u)))
        lo, hi = self.chart.domain
        if not lo < u < hi:
            raise OutOfDomain(f"parameter {u} outside open domain ({lo}, {hi})")
        return Point2(*self.placement.apply(*self.chart.position(u)))

    def parameter_grid(self, count: int) -> list:
        """Evenly spaced parameters across the natural range of the curve."""
        if count < 1:
            return []
        if self.fit is not None:
            return self.fit.index_grid(count)
        lo, hi = self.chart.natural
        if count == 1:
            return [0.5 * (lo + hi)]
        return [float(u) for u in np.linspace(lo, hi, count)]

    def resolve(self, P):
        """Locate ``P`` (a :class:`Point2` or a parameter) on the curve.

        Returns ``(chart, motion, u0)`` such that ``motion`` maps the chart's
        native coordinates to world coordinates and ``u0`` is P's parameter.
        """
        if self.fit is not None:
            if isinstance(P, Point2):
                q = self.placement.inverse_apply(P.x, P.y)
            else:
                q = self.fit.sample(P)
            chart, motion, offset = self.fit.local_chart(q)
            tol = MEMBERSHIP_RTOL * (1.0 + self.scale) + 10.0 * self.fit.noise
            if abs(offset) > tol:
                raise OffCurve(f"point lies {abs(offset):.3g} from the fitted curve (tolerance {tol:.3g})")
            return chart, motion.then(self.placement), 0.0
        if not isinstance(P, Point2):
            u = float(P)
            lo, hi = self.chart.domain
            if not lo < u < hi:
                raise OffCurve(f"parameter {u} outside open domain ({lo}, {hi})")
            return self.chart, self.placement, u
        qx, qy = self.placement.inverse_apply(P.x, P.y)
        u, dist = _project(self.chart, qx, qy)
        tol = MEMBERSHIP_RTOL * (1.0 + self.scale)
        if dist > tol:
            raise OffCurve(f"point ({P.x}, {P.y}) lies {dist:.3g} from the curve (tolerance {tol:.3g})")
        return self.chart, self.placement, u


def _project(chart: Chart, qx: float, qy: float):
    """Parameter of the nearest chart point and its distance."""
    lo, hi = chart.domain
    margin = 1e-9 * (hi - lo)
    grid = np.linspace(lo + margin, hi - margin, 4001)
    for _ in range(2):
        px, py = chart.position(grid)
        j = int(np.argmin((px - qx) ** 2 + (py - qy) ** 2))
        a, b = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]
        grid = np.linspace(a, b, 401)

    def g(u):
        x, y = chart.position(u)
        x1, y1 = chart.d1(u)
        return (x - qx) * x1 + (y - qy) * y1

    def dg(u):
        x, y = chart.position(u)
        x1, y1 = chart.d1(u)
        x2, y2 = chart.d2(u)
        return x1 * x1 + y1 * y1 + (x - qx) * x2 + (y - qy) * y2

    u = float(grid[200])
    a, b = float(grid[0]), float(grid[-1])
    if (g(a) > 0) != (g(b) > 0):
        u = safeguarded_newton(g, dg, a, b)
    x, y = chart.position(u)
    return u, math.hypot(x - qx, y - qy)


def _check_positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise BadParameter(f"{name} must be a positive finite number, got {value}")


def make_curve(kind: str, *, rotation: float = 0.0, shift=(0.0, 0.0), **params) -> CurveModel:
    """Build an analytic curve model.

    ``parabola(a, b)``: ``(x - a y)^2 = 2 b y``; ``circle(r)``; ``ellipse(p, q)``;
    ``cosh(domain)``: graph of ``cosh(x) - 1``;
    ``graph(f, df, d2f, d3f=None, domain, rise=None)``: a convex function graph.
    """
    if kind == "parabola":
        a, b = float(params.get("a", 0.0)), float(params.get("b", 1.0))
        _check_positive("b", b)
        if not math.isfinite(a):
            raise BadParameter(f"a must be finite, got {a}")
        chart = ParabolaChart(a, b, domain=params.get("domain", (-1e3, 1e3)))
        stored = {"a": a, "b": b}
    elif kind == "circle":
        r = float(params.get("r", 1.0))
        _check_positive("r", r)
        chart, stored = CircleChart(r), {"r": r}
    elif kind == "ellipse":
        p, q = float(params.get("p", 2.0)), float(params.get("q", 1.0))
        _check_positive("p", p)
        _check_positive("q", q)
        chart, stored = EllipseChart(p, q), {"p": p, "q": q}
    elif kind in ("cosh", "graph"):
        domain = tuple(float(v) for v in params.get("domain", (-2.0, 2.0)))
        if not (len(domain) == 2 and domain[0] < domain[1]):
            raise BadParameter(f"empty domain {domain}")
        if kind == "cosh":
            chart = cosh_chart(domain)
        else:
            chart = GraphChart(
                params["f"], params["df"], params["d2f"], params.get("d3f"),
                domain=domain, rise=params.get("rise"),
            )
        stored = {"domain": list(domain)}
        kind = "graph" if kind == "graph" else "cosh"
    else:
        raise BadParameter(f"unknown curve kind {kind!r}")

    lo, hi = chart.domain
    if math.isfinite(lo) and math.isfinite(hi):
        span = hi - lo
        probe = np.linspace(lo + 1e-6 * span, hi - 1e-6 * span, 201)
    else:
        probe = np.linspace(*chart.natural, 201)
    kappa = np.asarray(chart.curvature(probe), dtype=float)
    if not np.all(np.isfinite(kappa)) or np.any(kappa <= 0):
        bad = float(probe[int(np.argmin(np.where(np.isfinite(kappa), kappa, -np.inf)))])
        raise NonConvex(f"curvature is not positive at parameter {bad:.6g}")
    return CurveModel(kind, stored, chart, RigidMotion(float(rotation), tuple(shift)))


def curvature_at(curve: CurveModel, P) -> float:
    """Curvature at ``P`` with respect to the convex-side normal."""
    chart, _, u0 = curve.resolve(P)
    return float(chart.curvature(u0))


# --------------------------------------------------------------------------
# local graph


@dataclass(frozen=True)
class LocalGraph:
    """The curve near ``P`` written as ``y = f(x)`` in the canonical frame.

    Frame coordinates are evaluated along the chart parameter ``v``
    (``u = u0 + v``); ``f`` and its derivatives invert ``x(v)`` on the
    working interval ``[v_lo, v_hi]`` where ``x' > 0`` and ``f'' > 0``.
    """

    chart: Chart
    motion: RigidMotion
    u0: float
    P: Point2
    tangent: tuple  # native unit tangent at u0
    v_lo: float
    v_hi: float
    height_range: float
    kappa: float

    # frame-coordinate evaluators along the chart parameter
    def frame_xy(self, v):
        return self.chart.frame_offset(self.u0, v)

    def _rot(self, vec):
        tx, ty = self.tangent
        return tx * vec[0] + ty * vec[1], -ty * vec[0] + tx * vec[1]

    def frame_d1(self, v):
        return self._rot(self.chart.d1(self.u0 + v))

    def frame_d2(self, v):
        return self._rot(self.chart.d2(self.u0 + v))

    def frame_d3(self, v):
        return self._rot(self.chart.d3(self.u0 + v))

    @property
    def x_range(self):
        return self.frame_xy(self.v_lo)[0], self.frame_xy(self.v_hi)[0]

    @property
    def reference_height(self) -> float:
        """Largest informative height: the height range capped at the radius of curvature."""
        return min(self.height_range, 1.0 / self.kappa)

    @property
    def has_third(self) -> bool:
        return self.chart.has_third

    def param_of(self, x: float) -> float:
        lo, hi = self.x_range
        if not lo <= x <= hi:
            raise OutOfDomain(f"x = {x} outside working interval [{lo}, {hi}]")
        if x == 0.0:
            return 0.0
        return safeguarded_newton(
            lambda v: self.frame_xy(v)[0] - x,
            lambda v: self.frame_d1(v)[0],
            self.v_lo if x < 0 else 0.0,
            0.0 if x < 0 else self.v_hi,
        )

    def f(self, x):
        return self.frame_xy(self.param_of(x))[1]

    def df(self, x):
        v = self.param_of(x)
        x1, y1 = self.frame_d1(v)
        return y1 / x1

    def d2f(self, x):
        v = self.param_of(x)
        x1, y1 = self.frame_d1(v)
        x2, y2 = self.frame_d2(v)
        return (x1 * y2 - y1 * x2) / x1**3

    def d3f(self, x):
        v = self.param_of(x)
        x1, y1 = self.frame_d1(v)
        x2, y2 = self.frame_d2(v)
        x3, y3 = self.frame_d3(v)
        num = x1 * y2 - y1 * x2
        return ((x1 * y3 - y1 * x3) * x1 - 3.0 * num * x2) / x1**5

    def to_world(self, x, y) -> Point2:
        tx, ty = self.tangent
        nx, ny = -ty, tx
        native_p = self.motion.inverse_apply(self.P.x, self.P.y)
        wx, wy = native_p[0] + x * tx + y * nx, native_p[1] + x * ty + y * ny
        return Point2(*self.motion.apply(wx, wy))

    def to_frame(self, Q: Point2):
        qx, qy = self.motion.inverse_apply(Q.x, Q.y)
        px, py = self.motion.inverse_apply(self.P.x, self.P.y)
        tx, ty = self.tangent
        dx, dy = qx - px, qy - py
        return tx * dx + ty * dy, -ty * dx + tx * dy


def _first_zero(fn, dfn, limit, first_step):
    """First zero of ``fn`` on ``(0, limit)`` walking out from 0, else ``limit``."""
    bracket = grow_bracket(fn, 0.0, first_step, limit)
    if bracket is None:
        return limit * (1.0 - 1e-12)
    lo, hi = bracket
    return safeguarded_newton(fn, dfn, lo, hi)


def canonical_graph(curve: CurveModel, P) -> LocalGraph:
    """Express the curve near ``P`` as ``y = f(x)`` in P's canonical frame."""
    chart, motion, u0 = curve.resolve(P)
    tx, ty = _unit(*(float(c) for c in chart.d1(u0)))
    kappa = float(chart.curvature(u0))
    if not kappa > 0:
        raise NonConvex(f"curvature {kappa} at P is not positive")

    def dx(v):
        x1, y1 = chart.d1(u0 + v)
        return tx * x1 + ty * y1

    def ddx(v):
        x2, y2 = chart.d2(u0 + v)
        return tx * x2 + ty * y2

    def cross(v):
        x1, y1 = chart.d1(u0 + v)
        x2, y2 = chart.d2(u0 + v)
        return x1 * y2 - y1 * x2

    def dcross(v):
        x1, y1 = chart.d1(u0 + v)
        x3, y3 = chart.d3(u0 + v)
        return x1 * y3 - y1 * x3

    lo, hi = chart.domain
    bounds = []
    for sign, limit in ((1.0, hi - u0), (-1.0, u0 - lo)):
        if not limit > 0:
            raise WindowTooSmall("P sits on the boundary of the curve's domain")
        limit = min(limit, 1e6 * chart.scale)
        first = min(1e-3 * chart.scale, 0.5 * limit)
        stop = _first_zero(lambda w: dx(sign * w), lambda w: sign * ddx(sign * w), limit, first)
        if chart.has_third:
            stop = min(stop, _first_zero(lambda w: cross(sign * w), lambda w: sign * dcross(sign * w), limit, first))
        bounds.append(stop)
    v_hi, v_lo = bounds[0], -bounds[1]
    height = min(float(chart.frame_offset(u0, v_hi)[1]), float(chart.frame_offset(u0, v_lo)[1]))
    if not height > 0:
        raise WindowTooSmall("no positive chord heights available at P")
    wx, wy = motion.apply(*chart.position(u0))
    return LocalGraph(
        chart=chart,
        motion=motion,
        u0=float(u0),
        P=Point2(float(wx), float(wy)),
        tangent=(tx, ty),
        v_lo=float(v_lo),
        v_hi=float(v_hi),
        height_range=height,
        kappa=kappa,
    )
