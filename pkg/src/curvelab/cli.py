"""Command-line entry point: ``curvelab <subcommand> [flags]``.

Exit status is 0 on success, 2 on a usage error and 1 when the computation
itself fails; in the last case the error class name is printed to stderr
(and listed under ``errors`` in JSON output).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import report
from .asymptotics import length_derivative_identity, verify_small_h_laws
from .characterize import (
    PARABOLA_RATIOS,
    LENGTH_RATIO,
    RelativeHeights,
    detect_parabola,
    geometric_heights,
    ode_residuals,
    power_laws,
    ratio_profile,
    reconstruct_parabola,
)
from .construction import measure_at
from .curve import Point2, canonical_graph, make_curve
from .errors import CurveLabError
from .ingest import fit_local_model, load_points

FORMATS = {
    "construct": ("json", "svg"),
    "limits": ("json",),
    "ratios": ("json", "csv"),
    "detect": ("json",),
    "reconstruct": ("json",),
}


class UsageError(Exception):
    pass


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return v


def _tol(text):
    if text == "auto":
        return text
    return _positive_float(text)


def _add_common(p: argparse.ArgumentParser):
    src = p.add_argument_group("curve")
    one = src.add_mutually_exclusive_group(required=True)
    one.add_argument("--curve", choices=["parabola", "circle", "ellipse", "cosh"])
    one.add_argument("--input", metavar="FILE", help="CSV of x,y samples along a convex arc")
    src.add_argument("--a", type=float, default=0.0, help="parabola axis tilt in (x - a y)^2 = 2 b y")
    src.add_argument("--b", type=float, default=1.0, help="parabola parameter (curvature 1/b at the vertex)")
    src.add_argument("--r", type=float, default=1.0, help="circle radius")
    src.add_argument("--ellipse-p", type=float, default=2.0, help="ellipse semi-axis along x")
    src.add_argument("--ellipse-q", type=float, default=1.0, help="ellipse semi-axis along y")
    src.add_argument("--domain", type=float, nargs=2, metavar=("LO", "HI"), default=(-2.0, 2.0),
                     help="x-interval of the cosh graph")
    src.add_argument("--window", type=int, default=10, help="half-width of the local fit window (--input)")
    src.add_argument("--rotate", type=float, default=0.0, help="rotation applied to the curve, radians")
    src.add_argument("--shift", type=float, nargs=2, metavar=("DX", "DY"), default=(0.0, 0.0))

    pts = p.add_argument_group("base points")
    pts.add_argument("--p", nargs="+", metavar="P",
                     help="chart parameter, sample index, or world point x,y (repeatable values)")
    pts.add_argument("--p-count", type=_positive_int, help="evenly spaced base points across the curve")

    out = p.add_argument_group("output")
    out.add_argument("--format", default="json")
    out.add_argument("--output", metavar="FILE", help="write here instead of stdout")
    out.add_argument("--plot", metavar="FILE", help="also render a figure (.png, .svg or .pdf)")
    out.add_argument("--quad-tol", type=_positive_float, default=1e-10, help="sector quadrature tolerance")


def _add_heights(p, levels_default):
    hg = p.add_argument_group("heights")
    hg.add_argument("--h", type=_positive_float, nargs="+", help="explicit heights")
    hg.add_argument("--h-max", type=_positive_float, help="largest height of a ratio-4 geometric grid")
    hg.add_argument("--h-frac", type=_positive_float,
                    help="largest height as a fraction of each point's reference height")
    hg.add_argument("--h-levels", type=_positive_int, default=levels_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="curvelab", description="Chord and tangent-triangle measurements on convex curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build the figure at one (P, h) and report its measures")
    _add_common(p)
    _add_heights(p, 1)

    p = sub.add_parser("limits", help="extrapolate the scaled measures to h -> 0")
    _add_common(p)
    p.add_argument("--h0", type=_positive_float, help="coarsest height (default: 1%% of the reference height)")
    p.add_argument("--levels", type=_positive_int, default=6)
    p.add_argument("--order", type=_positive_int, default=3, help="terms in the sqrt(h) expansion")

    p = sub.add_parser("ratios", help="area and length ratios over a (P, h) grid")
    _add_common(p)
    _add_heights(p, 5)

    p = sub.add_parser("detect", help="decide whether the curve is a parabola from its ratios")
    _add_common(p)
    _add_heights(p, 4)
    p.add_argument("--tol", type=_tol, default="auto", help="deviation tolerance, or 'auto'")

    p = sub.add_parser("reconstruct", help="osculating parabola and the parabola ODE residuals")
    _add_common(p)
    _add_heights(p, 8)
    return parser


# --------------------------------------------------------------------------


def build_curve(args):
    if args.input:
        try:
            data = Path(args.input).read_bytes()
        except OSError as exc:
            raise UsageError(f"cannot read {args.input}: {exc.strerror}")
        cloud = load_points(data, name=args.input)
        curve = fit_local_model(cloud, args.window)
        if args.rotate or any(args.shift):
            curve = curve.moved(args.rotate, tuple(args.shift))
        return curve
    params = {
        "parabola": {"a": args.a, "b": args.b},
        "circle": {"r": args.r},
        "ellipse": {"p": args.ellipse_p, "q": args.ellipse_q},
        "cosh": {"domain": tuple(args.domain)},
    }[args.curve]
    return make_curve(args.curve, rotation=args.rotate, shift=tuple(args.shift), **params)


def _parse_p(text, sampled):
    if "," in text:
        try:
            x, y = (float(v) for v in text.split(","))
        except ValueError:
            raise UsageError(f"bad point {text!r}; expected x,y")
        return Point2(x, y)
    try:
        return int(text) if sampled else float(text)
    except ValueError:
        raise UsageError(f"bad base point {text!r}")


def base_points(args, curve, default_count):
    if args.p and args.p_count:
        raise UsageError("give either --p or --p-count, not both")
    if args.p:
        return [_parse_p(t, curve.fit is not None) for t in args.p]
    return curve.parameter_grid(args.p_count or default_count)


def height_spec(args, default_frac):
    given = [args.h is not None, args.h_max is not None, args.h_frac is not None]
    if sum(given) > 1:
        raise UsageError("give only one of --h, --h-max, --h-frac")
    if args.h is not None:
        return sorted(args.h, reverse=True)
    if args.h_max is not None:
        return geometric_heights(args.h_max, args.h_levels)
    return RelativeHeights(args.h_frac if args.h_frac is not None else default_frac, args.h_levels)


def _label(P):
    return report.point_dict(P) if isinstance(P, Point2) else P


# --------------------------------------------------------------------------
# subcommands; each returns (results, errors, text-or-None)


def cmd_construct(args, curve):
    points = base_points(args, curve, 1)
    if len(points) != 1:
        raise UsageError("construct takes exactly one base point")
    P = points[0]
    g = canonical_graph(curve, P)
    if args.h is not None:
        if len(args.h) != 1:
            raise UsageError("construct takes exactly one --h")
        h = args.h[0]
    elif args.h_frac is not None:
        h = args.h_frac * g.reference_height
    else:
        raise UsageError("construct needs --h or --h-frac")
    fig, m = measure_at(curve, P, h, tol=args.quad_tol, graph=g)
    if args.plot:
        report.plot_construction(fig, args.plot)
    text = report.construction_svg(fig) if args.format == "svg" else None
    results = report.figure_dict(fig, m)
    results["p"] = _label(P)
    return results, [], text


def cmd_limits(args, curve):
    points = base_points(args, curve, 5)
    results, errors, reps = [], [], []
    for p_id, P in enumerate(points):
        try:
            rep = verify_small_h_laws(curve, P, h0=args.h0, levels=args.levels, order=args.order, tol=args.quad_tol)
            g = canonical_graph(curve, P)
            ident = []
            for h in rep.heights:
                L = dict(rep.estimates["L"].samples)[h] * math.sqrt(h)
                ident.append(length_derivative_identity(curve, P, h, graph=g) / L)
        except CurveLabError as exc:
            errors.append({"p_id": p_id, "error": type(exc).__name__, "message": str(exc)})
            continue
        reps.append(rep)
        results.append({
            "p_id": p_id,
            "p": _label(P),
            "kappa": rep.kappa,
            "heights": rep.heights,
            "max_abs_error": rep.max_abs_error,
            "limits": {
                k: {
                    "extrapolated": e.extrapolated,
                    "theoretical": e.theoretical,
                    "abs_error": e.abs_error,
                    "error_estimate": e.error_estimate,
                }
                for k, e in rep.estimates.items()
            },
            "identity_relative_residual": ident,
        })
    if args.plot and reps:
        report.plot_limits(reps, args.plot)
    return results, errors, None


def _table_errors(table):
    return [{"p_id": r.p_id, "h": r.h, "error": r.skip_reason} for r in table.rows if r.skip_reason]


def cmd_ratios(args, curve):
    points = base_points(args, curve, 4)
    table = ratio_profile(curve, points, height_spec(args, 0.5), tol=args.quad_tol)
    if args.plot:
        targets = dict(PARABOLA_RATIOS, **{LENGTH_RATIO[0]: LENGTH_RATIO[1]})
        report.plot_ratios(table, args.plot, targets)
    text = report.ratio_csv(table) if args.format == "csv" else None
    results = {
        "points": [None if P is None else report.point_dict(P) for P in table.points],
        "reference_heights": table.reference_heights,
        "rows": report.table_rows(table),
    }
    return results, _table_errors(table), text


def cmd_detect(args, curve):
    points = base_points(args, curve, 5)
    table = ratio_profile(curve, points, height_spec(args, 0.5), tol=args.quad_tol)
    v = detect_parabola(table, tol=args.tol)
    if args.plot:
        targets = dict(PARABOLA_RATIOS, **{LENGTH_RATIO[0]: LENGTH_RATIO[1]})
        report.plot_ratios(table, args.plot, targets)
    results = {
        "is_parabola": v.is_parabola,
        "tolerance": v.tolerance,
        "tolerance_policy": v.tolerance_policy,
        "max_deviation": v.max_deviation,
        "worst_family": v.worst_family,
        "witness": {k: {"p_id": p, "h": h} for k, (p, h) in v.witness.items()},
        "theorem_verdicts": v.theorem_verdicts,
        "lambda_by_point": {k: [d[p] for p in sorted(d)] for k, d in v.lambda_by_point.items()},
        "lambda_spread": v.lambda_spread,
        "cells": v.cells,
        "heights": v.heights,
        "noise": curve.noise,
    }
    return results, _table_errors(table), None


def cmd_reconstruct(args, curve):
    points = base_points(args, curve, 1)
    results, errors = [], []
    for p_id, P in enumerate(points):
        try:
            g = canonical_graph(curve, P)
            conic = reconstruct_parabola(g)
            graph_ode = ode_residuals(g)
            spec = height_spec(args, 0.5)
            hs = spec.values(g.reference_height) if isinstance(spec, RelativeHeights) else spec
            cells = [measure_at(curve, P, h, tol=args.quad_tol, graph=g)[1] for h in hs]
            length_ode = ode_residuals([(m.h, m.L) for m in cells])
            laws = power_laws(cells)
        except CurveLabError as exc:
            errors.append({"p_id": p_id, "error": type(exc).__name__, "message": str(exc)})
            continue
        results.append({
            "p_id": p_id,
            "p": _label(P),
            "a": conic.a,
            "b": conic.b,
            "frame_conic": list(conic.implicit),
            "world_conic": list(conic.world),
            "implicit_residual": conic.residual,
            "residual_scale": conic.scale,
            "third_derivative_error": conic.third_derivative_error,
            "verdict": "parabola" if conic.is_parabola else "NotAParabola",
            "graph_ode_residual": graph_ode.graph_ode_residual,
            "first_integral_constant": graph_ode.first_integral_constant,
            "first_integral_residual": graph_ode.first_integral_residual,
            "euler_C1": length_ode.C1,
            "euler_C2": length_ode.C2,
            "euler_residual": length_ode.euler_residual,
            "power_laws": {k: {"lambda": lam, "mu": mu} for k, (lam, mu) in laws.items()},
        })
    return results, errors, None


COMMANDS = {
    "construct": cmd_construct,
    "limits": cmd_limits,
    "ratios": cmd_ratios,
    "detect": cmd_detect,
    "reconstruct": cmd_reconstruct,
}


def _config(args) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(args).items())}


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.buffer.write(text.encode("utf-8"))
        sys.stdout.flush()


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        if args.format not in FORMATS[args.command]:
            raise UsageError(f"{args.command} supports --format {', '.join(FORMATS[args.command])}")
        curve = build_curve(args)
        results, errors, text = COMMANDS[args.command](args, curve)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except CurveLabError as exc:
        name = type(exc).__name__
        print(f"{name}: {exc}", file=sys.stderr)
        if args.format == "json":
            _emit(report.json_report(_config(args), None, [{"error": name, "message": str(exc)}]), args.output)
        return 1
    if text is None:
        text = report.json_report(_config(args), results, errors)
    _emit(text, args.output)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
