"""Chord and tangent-triangle measurements on strictly convex plane curves."""

from .asymptotics import LimitEstimate, SmallHReport, length_derivative_identity, limit_estimate, verify_small_h_laws
from .characterize import (
    ConicCoefficients,
    OdeReport,
    RatioTable,
    RelativeHeights,
    Verdict,
    detect_parabola,
    ode_residuals,
    power_law_fit,
    ratio_profile,
    reconstruct_parabola,
)
from .construction import Figure, Measures, apex_for_chord, build_figure, measure, measure_at, sector_area
from .curve import CurveModel, LocalGraph, Point2, canonical_graph, curvature_at, make_curve
from .errors import CurveLabError
from .ingest import PointCloud, fit_local_model, load_points

__version__ = "0.1.0"

__all__ = [
    "ConicCoefficients", "CurveLabError", "CurveModel", "Figure", "LimitEstimate", "LocalGraph",
    "Measures", "OdeReport", "Point2", "PointCloud", "RatioTable", "RelativeHeights", "SmallHReport",
    "Verdict", "apex_for_chord", "build_figure", "canonical_graph", "curvature_at", "detect_parabola",
    "fit_local_model", "length_derivative_identity", "limit_estimate", "load_points", "make_curve",
    "measure", "measure_at", "ode_residuals", "power_law_fit", "ratio_profile", "reconstruct_parabola",
    "sector_area", "verify_small_h_laws",
]
