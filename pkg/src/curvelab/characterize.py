"""Constant-ratio tests for parabolas, conic reconstruction and ODE checks.

On a parabola every cell of the figure satisfies ``S/T = 4/3``,
``S/V = 2/3``, ``S/W = 8/9``, ``U/T = 1/2`` and ``ell/L = 1/2``, and each of
the area ratios being constant characterizes parabolas among strictly convex
curves. The detector here checks those constants on a finite ``(P, h)`` grid
and reports the grid with its verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .construction import Measures, _chord_params, measure_at
from .curve import CurveModel, LocalGraph, Point2, canonical_graph
from .errors import (
    CurveLabError,
    EmptyGrid,
    InsufficientSpread,
    MissingThirdDerivative,
    NonPositiveSample,
    SingularAtOrigin,
)

PARABOLA_RATIOS = {"r_ST": 4.0 / 3.0, "r_SV": 2.0 / 3.0, "r_SW": 8.0 / 9.0, "r_UT": 0.5}
LENGTH_RATIO = ("r_ellL", 0.5)
ANALYTIC_TOL = 1e-6
SAMPLED_NOISE_FACTOR = 50.0
H_FLOOR_RATIO = 0.05

# which ratio family each characterization theorem rests on
THEOREM_FAMILIES = {"S=2/3 V": "r_SV", "U=1/2 T": "r_UT", "S=8/9 W": "r_SW"}


@dataclass(frozen=True)
class RelativeHeights:
    """Heights ``top * H(P) * 4^-k`` where ``H(P)`` is the reference height at ``P``."""

    top: float = 0.5
    levels: int = 5

    def values(self, reference: float) -> list:
        return [self.top * reference * 4.0**-k for k in range(self.levels)]


def geometric_heights(h_max: float, levels: int) -> list:
    return [h_max * 4.0**-k for k in range(levels)]


@dataclass(frozen=True)
class RatioRow:
    p_id: int
    h: float
    measures: Optional[Measures] = None
    skip_reason: Optional[str] = None

    @property
    def ratios(self) -> dict:
        return self.measures.ratios() if self.measures is not None else {}


@dataclass(frozen=True)
class RatioTable:
    rows: list
    points: list  # world P per p_id (None when P could not be placed)
    reference_heights: list  # per p_id
    curve_kind: str
    noise: Optional[float] = None
    fit_size: Optional[int] = None  # samples per local fit, sampled curves only

    def valid_rows(self) -> list:
        return [r for r in self.rows if r.measures is not None]


def ratio_profile(curve: CurveModel, p_grid: Sequence, h_grid: Union[Sequence[float], RelativeHeights],
                  tol: float = 1e-10) -> RatioTable:
    """All five ratios at every ``(P, h)`` cell; failing cells carry a skip reason."""
    p_grid = list(p_grid)
    if not p_grid:
        raise EmptyGrid("no base points given")
    if not isinstance(h_grid, RelativeHeights):
        h_grid = sorted((float(h) for h in h_grid), reverse=True)
        if not h_grid:
            raise EmptyGrid("no heights given")
    rows, points, refs = [], [], []
    for p_id, P in enumerate(p_grid):
        try:
            g = canonical_graph(curve, P)
        except CurveLabError as exc:
            points.append(None)
            refs.append(math.nan)
            hs = h_grid if not isinstance(h_grid, RelativeHeights) else [math.nan] * h_grid.levels
            rows.extend(RatioRow(p_id, h, None, type(exc).__name__) for h in hs)
            continue
        points.append(g.P)
        refs.append(g.reference_height)
        hs = h_grid.values(g.reference_height) if isinstance(h_grid, RelativeHeights) else h_grid
        for h in hs:
            try:
                _, m = measure_at(curve, P, h, tol=tol, graph=g)
            except CurveLabError as exc:
                rows.append(RatioRow(p_id, h, None, type(exc).__name__))
                continue
            rows.append(RatioRow(p_id, h, m))
    fit_size = None if curve.fit is None else 2 * curve.fit.window + 1
    return RatioTable(rows=rows, points=points, reference_heights=refs, curve_kind=curve.kind,
                      noise=curve.noise, fit_size=fit_size)


@dataclass(frozen=True)
class Verdict:
    is_parabola: bool
    max_deviation: dict  # family -> max |ratio - constant|
    tolerance: float
    witness: dict  # family -> (p_id, h) of the worst cell
    theorem_verdicts: dict  # characterization -> bool
    lambda_by_point: dict  # family -> per-P mean ratio
    lambda_spread: dict  # family -> max - min of the per-P means
    tolerance_policy: str
    cells: int
    heights: list = field(default_factory=list)

    @property
    def worst_family(self) -> str:
        return max(self.max_deviation, key=self.max_deviation.get)


def auto_tolerance(table: RatioTable) -> tuple:
    """Detection tolerance and a description of the policy that produced it.

    Analytic curves use a fixed 1e-6. For sampled curves the fitted curve
    is off by roughly ``noise / sqrt(n)`` for ``n`` samples per fit, and an
    error ``e`` in the fitted curve moves the ratios by about ``e / h``. The
    tolerance is 50 times that, taken at the smallest per-point top height.
    """
    if table.noise is None:
        return ANALYTIC_TOL, "analytic: fixed 1e-6"
    tops = {}
    for r in table.valid_rows():
        tops[r.p_id] = max(tops.get(r.p_id, 0.0), r.h)
    h_ref = min(tops.values()) if tops else math.nan
    n = table.fit_size or 1
    tol = max(ANALYTIC_TOL, SAMPLED_NOISE_FACTOR * table.noise / (math.sqrt(n) * h_ref))
    return tol, f"sampled: max(1e-6, 50 * noise {table.noise:.3g} / (sqrt({n}) * h {h_ref:.3g}))"


def detect_parabola(table: RatioTable, tol: Union[float, str] = "auto",
                    floor_ratio: float = H_FLOOR_RATIO) -> Verdict:
    """Decide whether every area ratio sits at its parabola constant across the grid."""
    rows = table.valid_rows()
    if not rows:
        raise InsufficientSpread("table has no valid cells")
    by_point = {}
    for r in rows:
        by_point.setdefault(r.p_id, []).append(r)
    for p_id, prs in by_point.items():
        hs = {r.h for r in prs}
        top = max(hs)
        floor = floor_ratio * table.reference_heights[p_id]
        if len(hs) < 3:
            raise InsufficientSpread(f"point {p_id} has {len(hs)} distinct heights; need 3")
        if top < floor:
            raise InsufficientSpread(
                f"point {p_id}: largest height {top:.3g} below the floor {floor:.3g}; "
                "ratios are forced to the parabola constants as h -> 0"
            )
    if tol == "auto":
        tol, policy = auto_tolerance(table)
    else:
        tol = float(tol)
        policy = "explicit"

    families = dict(PARABOLA_RATIOS)
    families[LENGTH_RATIO[0]] = LENGTH_RATIO[1]
    max_dev, witness, lam, spread = {}, {}, {}, {}
    for name, const in families.items():
        devs = [(abs(r.ratios[name] - const), r) for r in rows]
        worst, wr = max(devs, key=lambda d: d[0])
        max_dev[name] = worst
        witness[name] = (wr.p_id, wr.h)
        means = {p: float(np.mean([r.ratios[name] for r in prs])) for p, prs in by_point.items()}
        lam[name] = means
        spread[name] = max(means.values()) - min(means.values())
    area_ok = all(max_dev[n] < tol for n in PARABOLA_RATIOS)
    return Verdict(
        is_parabola=area_ok,
        max_deviation=max_dev,
        tolerance=tol,
        witness=witness,
        theorem_verdicts={k: max_dev[f] < tol for k, f in THEOREM_FAMILIES.items()},
        lambda_by_point=lam,
        lambda_spread=spread,
        tolerance_policy=policy,
        cells=len(rows),
        heights=sorted({r.h for r in rows}, reverse=True),
    )


# --------------------------------------------------------------------------
# reconstruction


@dataclass(frozen=True)
class ConicCoefficients:
    """Parabola ``x^2 - 2 a x y + a^2 y^2 - 2 b y = 0`` in the canonical frame.

    ``implicit`` lists ``(A, B, C, D, E, F)`` of ``A x^2 + B x y + C y^2 + D x + E y + F``
    in that frame; ``world`` is the same conic in world coordinates.
    """

    a: float
    b: float
    implicit: tuple
    world: tuple
    residual: float
    scale: float
    is_parabola: bool
    third_derivative_error: Optional[float] = None  # fitted models only


def reconstruct_parabola(g: LocalGraph, residual_rtol: float = 1e-8) -> ConicCoefficients:
    """The parabola osculating ``g`` to third order at its origin."""
    if not g.has_third:
        raise MissingThirdDerivative("the local graph has no third derivative")
    k2 = float(g.d2f(0.0))
    k3 = float(g.d3f(0.0))
    b = 1.0 / k2
    a = -k3 * b * b / 3.0
    implicit = (1.0, -2.0 * a, a * a, 0.0, -2.0 * b, 0.0)

    # compare against the source arc up to half the reference height
    v_s, v_t = _chord_params(g, 0.5 * g.reference_height)
    vs = np.linspace(v_s, v_t, 41)
    pts = [g.frame_xy(v) for v in vs]
    xs = np.array([p[0] for p in pts], dtype=float)
    ys = np.array([p[1] for p in pts], dtype=float)
    resid = float(np.max(np.abs(xs * xs - 2 * a * xs * ys + a * a * ys * ys - 2 * b * ys)))
    scale = float(max(np.max(np.abs(xs)), np.max(np.abs(ys))))
    return ConicCoefficients(
        a=a,
        b=b,
        implicit=implicit,
        world=_conic_to_world(implicit, g),
        residual=resid,
        scale=scale,
        is_parabola=resid < residual_rtol * scale * scale,
        third_derivative_error=getattr(g.chart, "d3_error", None),
    )


def _conic_to_world(coeffs, g: LocalGraph) -> tuple:
    A, B, C, D, E, F = coeffs
    M = np.array([[A, B / 2, D / 2], [B / 2, C, E / 2], [D / 2, E / 2, F]])
    # homogeneous map world -> frame
    o = g.to_frame(Point2(0.0, 0.0))
    ex = np.subtract(g.to_frame(Point2(1.0, 0.0)), o)
    ey = np.subtract(g.to_frame(Point2(0.0, 1.0)), o)
    H = np.array([[ex[0], ey[0], o[0]], [ex[1], ey[1], o[1]], [0.0, 0.0, 1.0]])
    Mw = H.T @ M @ H
    return tuple(float(c) for c in (Mw[0, 0], 2 * Mw[0, 1], Mw[1, 1], 2 * Mw[0, 2], 2 * Mw[1, 2], Mw[2, 2]))


# --------------------------------------------------------------------------
# ODE residuals


@dataclass(frozen=True)
class OdeReport:
    kind: str  # "graph" or "length"
    graph_ode_residual: Optional[float] = None  # max |2 f^2 f'' - f'^2 (t f' - f)|
    first_integral_constant: Optional[float] = None  # best-fit a in 2/f' = t/f + a
    first_integral_residual: Optional[float] = None
    C1: Optional[float] = None
    C2: Optional[float] = None
    euler_residual: Optional[float] = None  # relative misfit of L to C1 sqrt(h) + C2 sqrt(h) ln h
    grid: list = field(default_factory=list)


def ode_residuals(candidate, t_grid: Optional[Sequence[float]] = None) -> OdeReport:
    """Residuals of the graph ODE of parabolas, or of the Euler equation for ``L(h)``.

    ``candidate`` is either a :class:`LocalGraph` (checked against
    ``2 f^2 f'' = f'^2 (t f' - f)`` and its first integral) or a sequence of
    ``(h, L)`` samples (fitted to ``C1 sqrt(h) + C2 sqrt(h) ln h``, the
    general solution of ``4 h^2 L'' + L = 0``).
    """
    if isinstance(candidate, LocalGraph):
        return _graph_residuals(candidate, t_grid)
    return _length_residuals(candidate)


def _graph_residuals(g: LocalGraph, t_grid) -> OdeReport:
    if t_grid is None:
        # the chord at half the reference height bounds the default grid
        lo, hi = (float(g.frame_xy(v)[0]) for v in _chord_params(g, 0.5 * g.reference_height))
        t_grid = list(np.linspace(lo, 0.1 * lo, 9)) + list(np.linspace(0.1 * hi, hi, 9))
    t_grid = [float(t) for t in t_grid]
    if any(abs(t) <= 1e-12 * g.chart.scale for t in t_grid):
        raise SingularAtOrigin("the t-grid touches the origin, where f = f' = 0")
    ode, consts = [], []
    for t in t_grid:
        v = g.param_of(t)
        _, f = g.frame_xy(v)
        x1, y1 = g.frame_d1(v)
        x2, y2 = g.frame_d2(v)
        f1 = y1 / x1
        f2 = (x1 * y2 - y1 * x2) / x1**3
        ode.append(abs(2.0 * f * f * f2 - f1 * f1 * (t * f1 - f)))
        consts.append(2.0 / f1 - t / f)
    a = float(np.mean(consts))
    return OdeReport(
        kind="graph",
        graph_ode_residual=float(max(ode)),
        first_integral_constant=a,
        first_integral_residual=float(max(abs(c - a) for c in consts)),
        grid=t_grid,
    )


def _length_residuals(samples) -> OdeReport:
    pts = [(float(h), float(L)) for h, L in samples]
    if len(pts) < 5:
        raise InsufficientSpread(f"need at least 5 (h, L) samples, got {len(pts)}")
    hs = np.array([p[0] for p in pts])
    Ls = np.array([p[1] for p in pts])
    if np.any(hs <= 0):
        raise NonPositiveSample("heights must be positive")
    A = np.column_stack([np.sqrt(hs), np.sqrt(hs) * np.log(hs)])
    norms = np.linalg.norm(A, axis=0)
    sol, *_ = np.linalg.lstsq(A / norms, Ls, rcond=None)
    C1, C2 = sol / norms
    misfit = np.max(np.abs(Ls - A @ (sol / norms))) / np.max(np.abs(Ls))
    return OdeReport(kind="length", C1=float(C1), C2=float(C2), euler_residual=float(misfit), grid=[float(h) for h in hs])


# --------------------------------------------------------------------------
# power laws


def power_law_fit(samples) -> tuple:
    """Least-squares ``(lambda, mu)`` in ``value = lambda * base ** mu``."""
    pts = [(float(b), float(v)) for b, v in samples]
    if len(pts) < 3:
        raise InsufficientSpread(f"need at least 3 samples, got {len(pts)}")
    if any(b <= 0 or v <= 0 for b, v in pts):
        raise NonPositiveSample("power-law samples must be positive")
    base = np.array([p[0] for p in pts])
    value = np.array([p[1] for p in pts])
    if base.max() / base.min() < 100.0:
        raise InsufficientSpread("base values must span at least two decades")
    lb, lv = np.log(base), np.log(value)
    A = np.column_stack([np.ones_like(lb), lb])
    (log_lam, mu), *_ = np.linalg.lstsq(A, lv, rcond=None)
    return float(math.exp(log_lam)), float(mu)


POWER_LAW_FAMILIES = {
    "S~V": ("V", "S", 2.0 / 3.0),
    "U~T": ("T", "U", 0.5),
    "S~W": ("W", "S", 8.0 / 9.0),
}


def power_laws(measures: Sequence[Measures]) -> dict:
    """Fitted ``(lambda, mu)`` for the S-V, U-T and S-W families."""
    out = {}
    for name, (base, value, _) in POWER_LAW_FAMILIES.items():
        out[name] = power_law_fit([(getattr(m, base), getattr(m, value)) for m in measures])
    return out
