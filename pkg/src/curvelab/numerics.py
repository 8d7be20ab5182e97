"""Scalar root finding and quadrature used throughout the package."""

import math

from .errors import RootNotBracketed, ToleranceNotMet

EPS = 2.220446049250313e-16


def safeguarded_newton(fn, dfn, lo, hi, rtol=4 * EPS, maxiter=200):
    """Root of ``fn`` in ``[lo, hi]`` by Newton steps kept inside a shrinking bracket.

    ``fn(lo)`` and ``fn(hi)`` must differ in sign (or one of them be zero).
    A Newton step that leaves the bracket, or fails to halve the bracket
    fast enough, is replaced by bisection, so convergence is guaranteed.
    """
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RootNotBracketed(f"no sign change on [{lo!r}, {hi!r}]")
    # orient so that fn(a) < 0 < fn(b)
    a, b = (lo, hi) if flo < 0 else (hi, lo)

    x = 0.5 * (lo + hi)
    dx_old = abs(hi - lo)
    dx = dx_old
    fx, dfx = fn(x), dfn(x)
    for _ in range(maxiter):
        if fx == 0.0:
            return x
        if fx < 0:
            a = x
        else:
            b = x
        use_bisect = (
            dfx == 0.0
            or not math.isfinite(dfx)
            or ((x - b) * dfx - fx) * ((x - a) * dfx - fx) > 0.0
            or abs(2.0 * fx) > abs(dx_old * dfx)
        )
        dx_old = dx
        if use_bisect:
            dx = 0.5 * (b - a)
            x_new = a + dx
        else:
            dx = fx / dfx
            x_new = x - dx
        if x_new == x or abs(dx) <= rtol * abs(x_new) or abs(b - a) <= rtol * max(abs(a), abs(b)):
            return x_new
        x = x_new
        fx, dfx = fn(x), dfn(x)
    return x


def grow_bracket(fn, start, first_step, limit, factor=2.0, max_steps=200):
    """Walk from ``start`` towards ``limit`` with geometrically growing steps.

    Returns ``(inner, outer)`` where ``fn`` changes sign, or ``None`` when the
    walk reaches ``limit`` without a sign change. ``limit`` is never evaluated;
    the last probe is placed just inside it.
    """
    f0 = fn(start)
    direction = 1.0 if limit > start else -1.0
    span = abs(limit - start)
    step = min(abs(first_step), span)
    inner = start
    for _ in range(max_steps):
        if step >= span:
            outer = start + direction * span * (1.0 - 1e-12)
            if (fn(outer) > 0) != (f0 > 0):
                return inner, outer
            return None
        outer = start + direction * step
        if (fn(outer) > 0) != (f0 > 0):
            return inner, outer
        inner = outer
        step *= factor
    return None


def adaptive_simpson(fn, a, b, tol=1e-10, max_evals=1_000_000, min_depth=2):
    """Integrate ``fn`` over ``[a, b]`` by adaptive Simpson with Richardson correction.

    The local error test is ``|S_left + S_right - S_whole| <= 15 * tol_local``
    where ``tol_local`` is halved on each split. Raises ``ToleranceNotMet``
    when the evaluation budget runs out.
    """
    if a == b:
        return 0.0
    fa, fm, fb = fn(a), fn(0.5 * (a + b)), fn(b)
    evals = 3
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s_whole, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = fn(lm), fn(rm)
        evals += 2
        left = (mid - lo) * (flo + 4.0 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4.0 * frm + fhi) / 6.0
        delta = left + right - s_whole
        # intervals at round-off width cannot be refined further
        tiny = (hi - lo) <= 8 * EPS * max(abs(lo), abs(hi))
        if depth >= min_depth and (abs(delta) <= 15.0 * eps or tiny):
            total += left + right + delta / 15.0
            continue
        if evals > max_evals:
            raise ToleranceNotMet(f"adaptive Simpson exceeded {max_evals} evaluations at tol {tol:g}")
        stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
        stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
    return total
