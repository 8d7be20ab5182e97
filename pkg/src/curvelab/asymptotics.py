"""Small-height limits of the figure measures.

Quantities such as ``L(h)/sqrt(h)`` have expansions in half-integer powers
of ``h`` for a C^3 curve, so their limits are estimated by least squares on
the basis ``{1, sqrt(h), h, ...}`` over a geometric grid ``h_k = h0 4^-k``
(``sqrt(h)`` halves at each level).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .construction import build_figure, measure_at
from .curve import CurveModel, canonical_graph
from .errors import BadGrid, IllConditioned

GRID_RATIO = 4.0
MIN_HEIGHT = 1e-10
MAX_CONDITION = 1e12
DEFAULT_H0_FRACTION = 1e-2


@dataclass(frozen=True)
class LimitEstimate:
    samples: list
    extrapolated: float
    order: int
    theoretical: Optional[float] = None
    abs_error: Optional[float] = None
    error_estimate: float = math.nan
    residuals: list = field(default_factory=list)


def limit_estimate(samples, order: int = 3, theoretical: Optional[float] = None) -> LimitEstimate:
    """Extrapolate ``q(h)`` to ``h = 0`` from samples on a ratio-4 geometric grid."""
    pts = sorted(((float(h), float(q)) for h, q in samples), key=lambda p: -p[0])
    if len(pts) < 4:
        raise BadGrid(f"need at least 4 samples, got {len(pts)}")
    if order < 1 or order > len(pts):
        raise BadGrid(f"model order {order} incompatible with {len(pts)} samples")
    hs = np.array([p[0] for p in pts])
    qs = np.array([p[1] for p in pts])
    if np.any(hs <= 0):
        raise BadGrid("heights must be positive")
    ratios = hs[:-1] / hs[1:]
    if np.any(np.abs(ratios / GRID_RATIO - 1.0) > 1e-6):
        raise BadGrid(f"heights are not a ratio-{GRID_RATIO:g} geometric grid")

    coeffs, resid, cond = _fit(hs, qs, order)
    if cond > MAX_CONDITION:
        raise IllConditioned(f"fit condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
    estimate = math.nan
    if len(pts) - 1 >= order:
        # drop the coarsest sample and refit: the spread measures extrapolation error
        alt, _, _ = _fit(hs[1:], qs[1:], order)
        estimate = abs(alt[0] - coeffs[0])
    c0 = float(coeffs[0])
    return LimitEstimate(
        samples=pts,
        extrapolated=c0,
        order=order,
        theoretical=theoretical,
        abs_error=None if theoretical is None else abs(c0 - theoretical),
        error_estimate=estimate,
        residuals=[float(r) for r in resid],
    )


def _fit(hs, qs, order):
    root = np.sqrt(hs)
    A = np.vander(root, order, increasing=True)
    norms = np.linalg.norm(A, axis=0)
    An = A / norms
    cond = np.linalg.cond(An)
    sol, *_ = np.linalg.lstsq(An, qs, rcond=None)
    coeffs = sol / norms
    return coeffs, qs - A @ coeffs, cond


def limit_targets(kappa: float) -> dict:
    """Closed-form ``h -> 0`` limits in terms of the curvature at P."""
    rk = math.sqrt(2.0 / kappa)
    return {
        "L": 2.0 * rk,
        "ell": rk,
        "S": 4.0 * rk / 3.0,
        "T": rk,
        "U": 0.5 * rk,
        "V": 2.0 * rk,
        "W": 1.5 * rk,
        "alpha": rk,
    }


def _scaled(m, h):
    rh = math.sqrt(h)
    h32 = h * rh
    return {
        "L": m.L / rh,
        "ell": m.ell / rh,
        "S": m.S / h32,
        "T": m.T / h32,
        "U": m.U / h32,
        "V": m.V / h32,
        "W": m.W / h32,
        "alpha": m.alpha,
    }


@dataclass(frozen=True)
class SmallHReport:
    kappa: float
    heights: list
    estimates: dict  # quantity -> LimitEstimate

    @property
    def max_abs_error(self) -> float:
        return max(e.abs_error for e in self.estimates.values())


def height_grid(h0: float, levels: int) -> list:
    floor = max(MIN_HEIGHT, 1e-6 * h0)
    hs = [h0 * GRID_RATIO**-k for k in range(levels)]
    if hs[-1] < floor * (1 - 1e-12):
        raise BadGrid(f"{levels} levels from h0 = {h0:g} go below the smallest usable height {floor:g}")
    return hs


def verify_small_h_laws(curve: CurveModel, P, h0: Optional[float] = None, levels: int = 6,
                        order: int = 3, tol: float = 1e-10) -> SmallHReport:
    """Extrapolate the seven scaled measures and ``alpha`` and compare with their limits.

    ``h0`` defaults to a small fraction of the reference height at ``P``.
    """
    g = canonical_graph(curve, P)
    if h0 is None:
        h0 = DEFAULT_H0_FRACTION * g.reference_height
    hs = height_grid(h0, levels)
    series = {k: [] for k in limit_targets(1.0)}
    for h in hs:
        _, m = measure_at(curve, P, h, tol=tol, graph=g)
        for k, val in _scaled(m, h).items():
            series[k].append((h, val))
    targets = limit_targets(g.kappa)
    estimates = {k: limit_estimate(v, order=order, theoretical=targets[k]) for k, v in series.items()}
    return SmallHReport(kappa=g.kappa, heights=hs, estimates=estimates)


def length_derivative_identity(curve: CurveModel, P, h: float, rel_step: float = 1e-5, graph=None):
    """``|ell(h) - (L(h) - h dL/dh)|`` with a central difference for ``dL/dh``."""
    g = graph if graph is not None else canonical_graph(curve, P)
    d = rel_step * h

    def length(x):
        fig = build_figure(curve, P, x, graph=g)
        return fig.t - fig.s

    fig = build_figure(curve, P, h, graph=g)
    L = fig.t - fig.s
    gap = (fig.slope_t - fig.slope_s) / (fig.slope_s * fig.slope_t)
    ell = L + gap * h
    dL = (length(h + d) - length(h - d)) / (2.0 * d)
    return float(abs(ell - (L - h * dL)))
