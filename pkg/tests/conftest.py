import math

import numpy as np
import pytest

from curvelab import make_curve
from curvelab.ingest import PointCloud


def random_parabolas(count=20, seed=2024):
    """(a, b) pairs with b in [0.1, 10] (log-uniform) and a in [-3, 3]."""
    rng = np.random.default_rng(seed)
    bs = 10.0 ** rng.uniform(-1.0, 1.0, count)
    as_ = rng.uniform(-3.0, 3.0, count)
    return [(float(a), float(b)) for a, b in zip(as_, bs)]


def rigid(points, angle, shift):
    c, s = math.cos(angle), math.sin(angle)
    x, y = points[:, 0], points[:, 1]
    return np.column_stack([c * x - s * y + shift[0], s * x + c * y + shift[1]])


def cloud_of(kind, n=200, noise=0.0, seed=0, angle=None, shift=None):
    """Point cloud along a convex arc, placed by a random rigid motion."""
    rng = np.random.default_rng(seed)
    if kind == "parabola":
        x = np.linspace(-1.0, 1.0, n)
        pts = np.column_stack([x, x * x / 2])
    elif kind == "circle":
        t = np.linspace(-1.2, 1.2, n)
        pts = np.column_stack([np.sin(t), 1 - np.cos(t)])
    elif kind == "ellipse":
        t = np.linspace(-1.2, 1.2, n)
        pts = np.column_stack([2 * np.sin(t), 1 - np.cos(t)])
    else:
        raise ValueError(kind)
    angle = rng.uniform(0, 2 * math.pi) if angle is None else angle
    shift = rng.uniform(-5, 5, 2) if shift is None else shift
    pts = rigid(pts, angle, shift)
    if noise:
        pts = pts + rng.uniform(-noise, noise, pts.shape)
    return PointCloud(pts)


ANALYTIC = {
    "parabola": lambda: make_curve("parabola", a=0.7, b=1.3),
    "circle": lambda: make_curve("circle", r=1.0),
    "ellipse": lambda: make_curve("ellipse", p=2.0, q=1.0),
    "cosh": lambda: make_curve("cosh"),
}


@pytest.fixture(params=sorted(ANALYTIC))
def analytic_curve(request):
    return ANALYTIC[request.param]()


# acceptance bookkeeping: tests marked ``criterion(n, title)`` roll up into one line per n
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "failed": []})
    if not report.passed:
        entry["ok"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] else "FAIL"
        line = f"{status} criterion {number}: {entry['title']}"
        if entry["failed"]:
            line += f" (failed: {', '.join(entry['failed'])})"
        terminalreporter.write_line(line)
