"""Deterministic serialization: JSON reports, sweep CSV, construction SVG, figures.

Every float goes through :func:`fmt`, so identical inputs give identical
bytes. Figures are rendered with matplotlib's Agg backend with dates and
random ids pinned.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

import numpy as np

from .characterize import RatioTable
from .construction import Figure, Measures

SCHEMA_VERSION = 1
RATIO_COLUMNS = ["r_ST", "r_SV", "r_SW", "r_UT", "r_ellL"]
MEASURE_COLUMNS = ["L", "ell", "T", "U", "V", "W", "S"]
CSV_HEADER = ["p_id", "h"] + MEASURE_COLUMNS + RATIO_COLUMNS + ["skip_reason"]


def fmt(v: float) -> str:
    """17 significant digits; scientific notation below 1e-4."""
    v = float(v)
    if v == 0.0:
        return "0"
    return format(v, ".17g")


# --------------------------------------------------------------------------
# JSON


def _json_value(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return _json_string(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_json_string(str(k))}: {_json_value(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(isinstance(x, (int, float, np.number)) and not isinstance(x, bool) for x in obj):
            return "[" + ", ".join(_json_value(x, indent, level + 1) for x in obj) + "]"
        items = [pad + _json_value(x, indent, level + 1) for x in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _json_string(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def to_json(obj, indent: int = 2) -> str:
    return _json_value(obj, indent, 0) + "\n"


def json_report(config: dict, results, errors: Iterable[dict] = ()) -> str:
    return to_json({"schema": SCHEMA_VERSION, "config": config, "results": results, "errors": list(errors)})


# --------------------------------------------------------------------------
# payloads


def point_dict(p) -> list:
    return [float(p.x), float(p.y)]


def measures_dict(m: Measures) -> dict:
    return {k: getattr(m, k) for k in ["h"] + MEASURE_COLUMNS + ["alpha"]}


def figure_dict(fig: Figure, m: Measures) -> dict:
    return {
        "P": point_dict(fig.P),
        "h": fig.h,
        "kappa": fig.graph.kappa,
        "frame": {"s": fig.s, "t": fig.t, "slope_s": fig.slope_s, "slope_t": fig.slope_t},
        "points": {
            "A": point_dict(fig.P),
            "A1": point_dict(fig.A1),
            "A2": point_dict(fig.A2),
            "B": point_dict(fig.B),
            "B1": point_dict(fig.B1),
            "B2": point_dict(fig.B2),
        },
        "measures": measures_dict(m),
        "ratios": m.ratios(),
    }


def table_rows(table: RatioTable) -> list:
    rows = sorted(table.rows, key=lambda r: (r.p_id, -r.h if math.isfinite(r.h) else math.inf))
    out = []
    for r in rows:
        d = {"p_id": r.p_id, "h": r.h}
        if r.measures is not None:
            d.update({k: getattr(r.measures, k) for k in MEASURE_COLUMNS})
            d.update(r.ratios)
        d["skip_reason"] = r.skip_reason
        out.append(d)
    return out


def ratio_csv(table: RatioTable) -> str:
    lines = [",".join(CSV_HEADER)]
    for d in table_rows(table):
        cells = []
        for col in CSV_HEADER:
            v = d.get(col)
            if v is None:
                cells.append("")
            elif isinstance(v, str):
                cells.append(v)
            elif isinstance(v, (int, np.integer)):
                cells.append(str(v))
            else:
                cells.append(fmt(v) if math.isfinite(v) else "")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# construction SVG

LABELS = {"A": "A", "A1": "A₁", "A2": "A₂", "B": "B", "B1": "B₁", "B2": "B₂"}


def construction_svg(fig: Figure, samples: int = 200, size: int = 480) -> str:
    """The curve arc, chord, three tangent lines and six labelled points."""
    g = fig.graph
    frame = fig.frame_points()
    span = 1.35 * (fig.t - fig.s)
    v_lo = max(g.v_lo * (1 - 1e-9), 1.6 * fig.v_s)
    v_hi = min(g.v_hi * (1 - 1e-9), 1.6 * fig.v_t)
    arc = [g.frame_xy(v) for v in np.linspace(v_lo, v_hi, samples)]
    arc = [(float(x), float(y)) for x, y in arc]

    xs = [p[0] for p in arc] + [p[0] for p in frame.values()]
    ys = [p[1] for p in arc] + [p[1] for p in frame.values()]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    extent = max(x1 - x0, y1 - y0, 1e-300)
    margin = 0.08 * extent
    unit = size / (extent + 2 * margin)

    def px(p):
        # frame y up -> svg y down
        return fmt_px((p[0] - x0 + margin) * unit), fmt_px((y1 - p[1] + margin) * unit)

    width = fmt_px((x1 - x0 + 2 * margin) * unit)
    height = fmt_px((y1 - y0 + 2 * margin) * unit)
    path = " ".join(("M" if i == 0 else "L") + "{},{}".format(*px(p)) for i, p in enumerate(arc))

    def line(p, q, cls):
        (ax, ay), (bx, by) = px(p), px(q)
        return f'<line class="{cls}" x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}"/>'

    # base tangent runs B1..B2 extended a little; the chord tangents run A_i..B
    b1, b2 = frame["B1"], frame["B2"]
    pad = 0.1 * span
    base_l = (min(b1[0], frame["A"][0]) - pad, 0.0)
    base_r = (max(b2[0], frame["A"][0]) + pad, 0.0)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        "<style>path{fill:none;stroke:#222;stroke-width:1.5}"
        "line{stroke-width:1}.chord{stroke:#1f5fa8}.tangent{stroke:#b03a2e}"
        "circle{fill:#222}text{font:12px sans-serif}</style>",
        f'<path class="curve" d="{path}"/>',
        line(frame["A1"], frame["A2"], "chord"),
        line(base_l, base_r, "tangent"),
        line(frame["A1"], frame["B"], "tangent"),
        line(frame["A2"], frame["B"], "tangent"),
    ]
    for key in ("A", "A1", "A2", "B", "B1", "B2"):
        cx, cy = px(frame[key])
        parts.append(f'<circle cx="{cx}" cy="{cy}" r="3"/>')
    for key in ("A", "A1", "A2", "B", "B1", "B2"):
        cx, cy = px(frame[key])
        parts.append(f'<text x="{cx}" y="{cy}" dx="5" dy="-5">{LABELS[key]}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def fmt_px(v: float) -> str:
    return f"{v:.3f}"


# --------------------------------------------------------------------------
# matplotlib figures


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "curvelab"
    plt.rcParams["svg.fonttype"] = "path"
    return plt


def save_figure(fig, path: str):
    fmt_ext = path.rsplit(".", 1)[-1].lower() if "." in path else "png"
    meta = {"svg": {"Date": None}, "pdf": {"CreationDate": None, "ModDate": None}, "png": {"Software": None}}
    fig.savefig(path, format=fmt_ext, metadata=meta.get(fmt_ext))


def plot_construction(fig_data: Figure, path: str):
    plt = _pyplot()
    g = fig_data.graph
    frame = fig_data.frame_points()
    v_lo = max(g.v_lo * (1 - 1e-9), 1.6 * fig_data.v_s)
    v_hi = min(g.v_hi * (1 - 1e-9), 1.6 * fig_data.v_t)
    arc = np.array([g.frame_xy(v) for v in np.linspace(v_lo, v_hi, 300)], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(arc[:, 0], arc[:, 1], color="0.15", lw=1.5)
    a1, a2, b, b1, b2 = (frame[k] for k in ("A1", "A2", "B", "B1", "B2"))
    ax.plot([a1[0], a2[0]], [a1[1], a2[1]], color="#1f5fa8")
    for p, q in ((a1, b), (a2, b), (b1, b2)):
        ax.plot([p[0], q[0]], [p[1], q[1]], color="#b03a2e", lw=1)
    ax.axhline(0.0, color="#b03a2e", lw=0.6, ls=":")
    for key, p in frame.items():
        ax.plot(*p, "o", color="0.15", ms=3)
        ax.annotate(LABELS[key], p, textcoords="offset points", xytext=(4, 4))
    ax.set_aspect("equal")
    ax.set_xlabel("tangent coordinate")
    ax.set_ylabel("normal coordinate")
    fig.tight_layout()
    save_figure(fig, path)
    plt.close(fig)


def plot_ratios(table: RatioTable, path: str, targets: Optional[dict] = None):
    plt = _pyplot()
    fig, axes = plt.subplots(1, len(RATIO_COLUMNS), figsize=(3 * len(RATIO_COLUMNS), 3), sharex=True)
    rows = [r for r in table.rows if r.measures is not None]
    for ax, col in zip(axes, RATIO_COLUMNS):
        for p_id in sorted({r.p_id for r in rows}):
            pts = sorted((r.h, r.ratios[col]) for r in rows if r.p_id == p_id)
            ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", ms=3, lw=1, label=f"P{p_id}")
        if targets and col in targets:
            ax.axhline(targets[col], color="0.4", ls="--", lw=0.8)
        ax.set_xscale("log")
        ax.set_title(col)
        ax.set_xlabel("h")
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    save_figure(fig, path)
    plt.close(fig)


def plot_limits(reports: list, path: str):
    """Scaled measures against sqrt(h) for each base point, with their targets."""
    plt = _pyplot()
    names = list(reports[0].estimates)
    fig, axes = plt.subplots(2, (len(names) + 1) // 2, figsize=(12, 5))
    for ax, name in zip(axes.flat, names):
        for i, rep in enumerate(reports):
            est = rep.estimates[name]
            hs = np.array([s[0] for s in est.samples])
            qs = np.array([s[1] for s in est.samples])
            line, = ax.plot(np.sqrt(hs), qs, "o", ms=3, label=f"P{i}")
            ax.plot([0.0], [est.extrapolated], "x", color=line.get_color())
            ax.axhline(est.theoretical, color=line.get_color(), lw=0.6, ls="--")
        ax.set_title(name)
        ax.set_xlabel("sqrt(h)")
    for ax in list(axes.flat)[len(names):]:
        ax.axis("off")
    axes.flat[0].legend(fontsize=7)
    fig.tight_layout()
    save_figure(fig, path)
    plt.close(fig)
