"""Sampled curves: CSV loading and local quartic fits.

A sampled curve has no global formula. Around each query point the nearest
``2 * window + 1`` samples are rotated into an estimated tangent frame and a
tricube-weighted quartic ``y = q(x)`` is fitted; the fit is repeated twice
after rotating by the fitted slope so the frame tangent matches the fit.
That quartic becomes the local chart consumed by the rest of the package.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .curve import CurveModel, PolynomialGraphChart, RigidMotion
from .errors import NotConvex, OutOfDomain, ParseError, TooFewPoints, WindowTooLarge, WindowTooSmall

MIN_POINTS = 7
FIT_DEGREE = 4
REFITS = 2


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # shape (n, 2), input order
    source: str = "<stream>"

    def __len__(self):
        return len(self.points)


def load_points(source, name: str = "<stream>") -> PointCloud:
    """Parse ``x,y`` lines into a :class:`PointCloud`.

    ``source`` may be bytes, text, or a binary/text file object. A first
    line that does not parse as two numbers is taken as a header.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    pts = []
    for lineno, raw in enumerate(io.StringIO(source), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 2:
            if lineno == 1:
                continue
            raise ParseError(f"expected 2 fields, found {len(fields)}", line=lineno)
        values = []
        for col, text in enumerate(fields, start=1):
            try:
                v = float(text)
            except ValueError:
                v = None
            if v is None or not math.isfinite(v):
                break
            values.append(v)
        if len(values) != 2:
            if lineno == 1 and not pts:
                continue
            raise ParseError(f"malformed number {fields[len(values)]!r}", line=lineno, column=len(values) + 1)
        if pts and pts[-1] == tuple(values):
            raise ParseError("repeats the previous point", line=lineno)
        pts.append(tuple(values))
    if len(pts) < MIN_POINTS:
        raise TooFewPoints(f"need at least {MIN_POINTS} points, got {len(pts)}")
    return PointCloud(np.array(pts, dtype=float), name)


def _turns(points):
    e = np.diff(points, axis=0)
    return e[:-1, 0] * e[1:, 1] - e[:-1, 1] * e[1:, 0]


class LocalFitModel:
    """Windowed quartic fits over an ordered, left-turning sample arc."""

    def __init__(self, points: np.ndarray, window: int):
        self.points = np.asarray(points, dtype=float)
        self.window = int(window)
        lo, hi = self.points.min(axis=0), self.points.max(axis=0)
        self.scale = float(np.hypot(*(hi - lo)))
        rms = [self._fit(self.points[i])[3] for i in range(self.window, len(self.points) - self.window)]
        self.noise = float(np.median(rms))

    def sample(self, index) -> tuple:
        i = int(round(float(index)))
        if not 0 <= i < len(self.points):
            raise OutOfDomain(f"sample index {index} outside 0..{len(self.points) - 1}")
        return float(self.points[i, 0]), float(self.points[i, 1])

    def index_grid(self, count: int) -> list:
        lo, hi = self.window, len(self.points) - 1 - self.window
        if count == 1:
            return [(lo + hi) // 2]
        return sorted({int(round(v)) for v in np.linspace(lo, hi, count)})

    def _fit(self, q):
        """Fit around ``q``; returns ``(coeffs, angle, x_extent, rms, coeff_sd)``.

        ``coeff_sd`` holds the standard deviation of each coefficient per unit noise.
        """
        return self._fit_w(q, self.window)

    def _fit_w(self, q, w):
        pts = self.points
        n = len(pts)
        i = int(np.argmin(np.sum((pts - q) ** 2, axis=1)))
        j0 = min(max(i - w, 0), n - (2 * w + 1))
        win = pts[j0:j0 + 2 * w + 1]
        tangent = pts[min(i + 1, n - 1)] - pts[max(i - 1, 0)]
        angle = math.atan2(tangent[1], tangent[0])
        for it in range(REFITS + 1):
            c, s = math.cos(angle), math.sin(angle)
            d = win - q
            x = c * d[:, 0] + s * d[:, 1]
            y = -s * d[:, 0] + c * d[:, 1]
            coeffs, rms, sd = _weighted_quartic(x, y)
            if it < REFITS:
                angle += math.atan(coeffs[1])
        return coeffs, angle, (float(x.min()), float(x.max())), rms, sd

    def local_chart(self, q):
        """Quartic chart around ``q``; returns ``(chart, motion, offset)``.

        ``offset`` is the signed distance along the frame normal from ``q`` to
        the fitted curve.
        """
        q = np.asarray(q, dtype=float)
        coeffs, angle, (xmin, xmax), _, sd = self._fit(q)
        if xmin >= 0 or xmax <= 0:
            raise WindowTooSmall("the query point is not surrounded by samples on both sides")
        if coeffs[2] <= 0:
            raise NotConvex("fitted second derivative is not positive at the query point")
        chart = PolynomialGraphChart(coeffs, (xmin, xmax))
        chart.d3_error = 6.0 * float(sd[3]) * self.noise
        motion = RigidMotion(angle, (float(q[0]), float(q[1])))
        return chart, motion, float(coeffs[0])


def _weighted_quartic(x, y):
    span = 1.1 * float(np.max(np.abs(x)))
    t = x / span
    wts = (1.0 - np.abs(t) ** 3) ** 3
    A = np.vander(t, FIT_DEGREE + 1, increasing=True)
    sw = np.sqrt(wts)
    Aw = A * sw[:, None]
    sol, *_ = np.linalg.lstsq(Aw, y * sw, rcond=None)
    powers = span ** np.arange(FIT_DEGREE + 1)
    coeffs = sol / powers
    resid = y - A @ sol
    dof = max(len(x) - (FIT_DEGREE + 1), 1)
    # sandwich covariance of the weighted fit under unit white noise
    bread = np.linalg.pinv(Aw.T @ Aw)
    meat = (A * wts[:, None]).T @ (A * wts[:, None])
    sd = np.sqrt(np.abs(np.diag(bread @ meat @ bread))) / powers
    return coeffs, float(math.sqrt(np.sum(resid**2) / dof)), sd


def fit_local_model(cloud: PointCloud, window: int = 10) -> CurveModel:
    """Sampled curve model backed by windowed quartic fits."""
    if window < 3:
        raise WindowTooSmall(f"window half-width must be at least 3, got {window}")
    pts = np.asarray(cloud.points, dtype=float)
    if 2 * window + 1 > len(pts):
        raise WindowTooLarge(f"window of {2 * window + 1} samples exceeds the {len(pts)}-point cloud")
    turns = _turns(pts)
    if np.all(turns < 0):
        pts = pts[::-1].copy()
    elif not np.all(turns > 0):
        k = int(np.argmax(np.sign(turns) != np.sign(turns[0]))) + 1
        raise NotConvex(f"edge turn changes sign at sample {k}")
    fit = LocalFitModel(pts, window)
    return CurveModel("sampled", {"points": len(pts), "window": window, "source": cloud.source}, fit=fit)
