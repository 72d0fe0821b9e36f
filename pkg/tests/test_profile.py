import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flatlab.errors import DomainError
from flatlab.logspace import log1mexp, logdiffexp
from flatlab.profile import (
    Profile,
    log_scaling_ratio,
    phi_derivative,
    phi_eval,
    phi_inverse,
    scaling_ratio,
)


@pytest.mark.parametrize(
    "m, x, expected",
    [(1, 0.0, 0.0), (1, -2.0, 0.0), (1, 1.0, 0.367879441171442), (2, 0.5, 0.0183156388887342)],
)
def test_phi_examples(m, x, expected):
    assert phi_eval(Profile(m), x) == pytest.approx(expected, rel=1e-14, abs=0)


def test_phi_matches_mpmath():
    for m in (1, 2, 3):
        for x in (0.05, 0.3, 0.9):
            exact = float(mpmath.exp(-1 / mpmath.mpf(x) ** m))
            assert phi_eval(Profile(m), x) == pytest.approx(exact, rel=1e-13)


def test_derivative_examples():
    p = Profile(1)
    assert phi_derivative(p, 0.0, 1) == 0.0
    assert phi_derivative(p, 1.0, 1) == pytest.approx(math.exp(-1), rel=1e-14)
    # (x^-4 - 2 x^-3) e^(-1/x) vanishes at x = 1/2
    assert abs(phi_derivative(p, 0.5, 2)) < 1e-15


@pytest.mark.parametrize("m", [1, 2])
@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_derivatives_match_mpmath(m, order):
    f = lambda x: mpmath.exp(-1 / x**m)
    for x in (0.2, 0.5, 0.8):
        exact = float(mpmath.diff(f, mpmath.mpf(x), order))
        assert phi_derivative(Profile(m), x, order) == pytest.approx(exact, rel=1e-10)


@pytest.mark.parametrize("m", [1, 2])
def test_derivatives_underflow_cleanly(m):
    # x^-(m+1) overflows here; the derivatives must come out as 0, not nan
    x = np.array([1e-120, 1e-200, 5e-324])
    for order in (1, 2, 3, 4):
        with np.errstate(over="raise", invalid="raise"):
            vals = phi_derivative(Profile(m), x, order)
        assert np.all(vals == 0.0)
        lv, sign = Profile(m).log_derivative(1e-200, order)
        assert lv <= -1e199 and sign in (1.0, -1.0)


def test_derivative_order_checked():
    with pytest.raises(DomainError):
        phi_derivative(Profile(1), 0.5, 5)


def test_first_derivative_finite_difference():
    p = Profile(1)
    h = 1e-6
    for x in np.linspace(0.05, 1.0, 40):
        fd = (phi_eval(p, x + h) - phi_eval(p, x - h)) / (2 * h)
        val = phi_derivative(p, x, 1)
        assert abs(fd - val) <= max(1e-8, 1e-6 * abs(val))


@pytest.mark.parametrize(
    "m, y, expected", [(1, math.exp(-1), 1.0), (1, math.exp(-10), 0.1), (2, math.exp(-100), 0.1)]
)
def test_inverse_examples(m, y, expected):
    assert phi_inverse(Profile(m), y) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("y", [0.0, -1.0, 1.0, 2.0])
def test_inverse_domain(y):
    with pytest.raises(DomainError):
        phi_inverse(Profile(1), y)


@given(st.integers(1, 4), st.floats(0.0, 1.0))
def test_inverse_roundtrip(m, frac):
    p = Profile(m)
    lo, hi = math.log(1e-3), math.log(0.9 * p.epsilon0)
    x = math.exp(lo + frac * (hi - lo))
    assert p.log_inverse(p.log_phi(x)) == pytest.approx(x, rel=1e-12)
    # phi(x) itself underflows below x ~ 1/708 for m = 1
    if phi_eval(p, x) > 1e-300:
        assert phi_inverse(p, phi_eval(p, x)) == pytest.approx(x, rel=1e-12)


@given(st.integers(1, 3), st.floats(-1e4, -1e-3))
def test_log_inverse_consistent(m, log_y):
    p = Profile(m)
    x = p.log_inverse(log_y)
    assert p.log_phi(x) == pytest.approx(log_y, rel=1e-12)


def test_scaling_ratio_examples():
    p = Profile(1)
    assert log_scaling_ratio(p, 0.01, 0.5) == pytest.approx(-100.0, rel=1e-12)
    assert scaling_ratio(p, 0.01, 0.5) == pytest.approx(math.exp(-100), rel=1e-10)
    assert scaling_ratio(p, 0.01, 2.0) == pytest.approx(math.exp(50), rel=1e-10)
    for m in (1, 2, 3):
        assert scaling_ratio(Profile(m), 0.3, 1.0) == 1.0


def test_scaling_ratio_underflow_reported():
    with pytest.raises(DomainError):
        scaling_ratio(Profile(1), 1e-4, 0.5)
    assert log_scaling_ratio(Profile(1), 1e-4, 0.5) == pytest.approx(-1e4)


def test_scaling_dichotomy():
    p = Profile(1)
    rs = [0.2, 0.1, 0.05, 0.02, 0.01]
    below = [log_scaling_ratio(p, r, 0.5) for r in rs]
    above = [log_scaling_ratio(p, r, 2.0) for r in rs]
    assert all(b < a for a, b in zip(below, below[1:]))
    assert all(b > a for a, b in zip(above, above[1:]))


def test_convexity_radius_default():
    assert Profile(1).epsilon0 == pytest.approx(0.5)
    assert Profile(2).epsilon0 == pytest.approx(math.sqrt(2 / 3))


def test_bad_profiles():
    with pytest.raises(DomainError):
        Profile(0)
    with pytest.raises(DomainError):
        Profile(1, form="gaussian")
    with pytest.raises(DomainError):
        Profile(1, form="custom")


def test_custom_profile_agrees_with_builtin():
    derivs = [lambda x, k=k: phi_derivative(Profile(1), x, k) for k in (1, 2, 3, 4)]
    p = Profile(1, form="custom", epsilon0=0.5, func=lambda x: math.exp(-1 / x), derivs=derivs)
    assert p(0.3) == pytest.approx(phi_eval(Profile(1), 0.3))
    assert phi_inverse(p, math.exp(-10)) == pytest.approx(0.1, rel=1e-12)


@given(st.floats(-700, -1e-12))
def test_log1mexp(x):
    with mpmath.workdps(40):
        ref = float(mpmath.log1p(-mpmath.exp(x)))
    assert log1mexp(x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


def test_logdiffexp():
    assert logdiffexp(math.log(3.0), math.log(1.0)) == pytest.approx(math.log(2.0))
    assert logdiffexp(-1000.0, -1001.0) == pytest.approx(-1000.0 + math.log1p(-math.exp(-1)))
