import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from curvelab.errors import RootNotBracketed, ToleranceNotMet
from curvelab.numerics import adaptive_simpson, grow_bracket, safeguarded_newton


def test_newton_matches_brentq_on_cubic():
    f = lambda x: x**3 - 2 * x - 5
    df = lambda x: 3 * x * x - 2
    assert safeguarded_newton(f, df, 2.0, 3.0) == pytest.approx(brentq(f, 2.0, 3.0, xtol=1e-15), rel=1e-14)


def test_newton_survives_flat_derivative():
    # derivative vanishes at the midpoint; the bracket must still win
    f = lambda x: x**3 - 0.001
    df = lambda x: 3 * x * x
    assert safeguarded_newton(f, df, -1.0, 1.0) == pytest.approx(0.1, rel=1e-13)


def test_newton_requires_sign_change():
    with pytest.raises(RootNotBracketed):
        safeguarded_newton(lambda x: x * x + 1, lambda x: 2 * x, -1.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(0.1, 5.0))
def test_newton_square_roots(c, k):
    root = safeguarded_newton(lambda x: x**k - c, lambda x: k * x ** (k - 1), 0.0, 2 * c ** (1 / k) + 1)
    assert root == pytest.approx(c ** (1 / k), rel=1e-12)


def test_grow_bracket_finds_first_crossing():
    lo, hi = grow_bracket(lambda x: x - 3.3, 0.0, 0.1, 100.0)
    assert lo < 3.3 < hi


def test_grow_bracket_gives_up_at_limit():
    assert grow_bracket(lambda x: x - 30.0, 0.0, 0.1, 10.0) is None


def test_grow_bracket_walks_left():
    lo, hi = grow_bracket(lambda x: x + 2.0, 0.0, 0.5, -10.0)
    assert hi <= -2.0 < lo


@pytest.mark.parametrize(
    "fn, a, b",
    [
        (math.sin, 0.0, math.pi),
        (lambda x: math.exp(-x * x), -3.0, 2.0),
        (lambda x: math.sqrt(1 - x * x), -1.0, 1.0),
        (lambda x: 1 / (1 + 25 * x * x), -1.0, 1.0),
    ],
)
def test_simpson_against_scipy_quad(fn, a, b):
    ref, _ = quad(fn, a, b, epsabs=1e-13)
    assert adaptive_simpson(fn, a, b, tol=1e-11) == pytest.approx(ref, abs=1e-9)


def test_simpson_exact_on_cubic():
    assert adaptive_simpson(lambda x: 4 * x**3 - x + 2, -1.0, 2.0) == pytest.approx(15 - 1.5 + 6, abs=1e-13)


def test_simpson_budget():
    with pytest.raises(ToleranceNotMet):
        adaptive_simpson(lambda x: math.sin(1 / x), 1e-4, 1.0, tol=1e-14, max_evals=500)


def test_simpson_empty_interval():
    assert adaptive_simpson(math.exp, 1.0, 1.0) == 0.0
