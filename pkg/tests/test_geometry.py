import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from flatlab.errors import (
    DomainError,
    KindError,
    NormalizationError,
    RootBracketError,
    SymmetryError,
)
from flatlab.geometry import (
    ConeCurve,
    HartogsFlat,
    ProductDiscBall,
    UnitBall,
    UnitDisc,
    decompose_vector,
    grad_rho,
    nearest_boundary_point,
    rho,
    tangential_radius,
)
from flatlab.profile import Profile, phi_derivative, phi_eval

H1 = HartogsFlat(Profile(1), n=1)
H2 = HartogsFlat(Profile(2), n=1)


def test_rho_examples():
    assert rho(H1, [-0.1, 0]) == -0.1
    assert rho(H1, [0, 0.5]) == pytest.approx(math.exp(-4), rel=1e-14)
    assert rho(H1, [-math.exp(-4), 0.5]) == pytest.approx(0.0, abs=1e-17)


def test_rho_kind():
    with pytest.raises(KindError):
        rho(UnitDisc(), [0.1])


def test_containment():
    assert UnitDisc().contains([0.5j])
    assert not UnitBall(2).contains([0.8, 0.8])
    assert ProductDiscBall(1).contains([0.9, 0.9])
    assert H1.contains([-0.1, 0.3])
    assert not H1.contains([-0.01, 0.9])
    with pytest.raises(DomainError):
        H1.contains([0.1])


def test_grad_rho_examples():
    g, A = grad_rho(H1, [0, 0])
    assert np.array_equal(g, [1.0, 0.0]) and A == 1.0
    g, A = grad_rho(H1, [-math.exp(-4), 0.5])
    assert g[1] == pytest.approx(2 * 0.5 * 16 * math.exp(-4), rel=1e-13)
    assert A == pytest.approx(math.hypot(1, g[1]))
    with pytest.raises(SymmetryError):
        grad_rho(H1, [0, 0.5j])


def test_nearest_point_normal():
    p, dist = nearest_boundary_point(H1, [-0.01, 0])
    assert np.allclose(p, 0) and dist == pytest.approx(0.01)


def test_nearest_point_against_brute_force():
    x, r = -0.1, 0.05
    p, dist = nearest_boundary_point(H1, [x, r])
    f = lambda s: (x + phi_eval(H1.profile, s * s)) ** 2 + (r - s) ** 2
    ref = minimize_scalar(f, bounds=(0, 1), method="bounded", options={"xatol": 1e-12})
    assert p[1].real == pytest.approx(ref.x, abs=1e-7)
    assert dist == pytest.approx(math.sqrt(ref.fun), rel=1e-10)
    s = p[1].real
    phi, dphi = phi_eval(H1.profile, s * s), phi_derivative(H1.profile, s * s, 1)
    # stationarity: (x + phi(s^2)) 2 s phi'(s^2) = r - s
    assert (x + phi) * 2 * s * dphi == pytest.approx(r - s, abs=1e-14)


def test_nearest_point_flat_region():
    p, dist = nearest_boundary_point(H1, [-1e-8, 0.02])
    assert p[1].real == pytest.approx(0.02, rel=1e-12)
    assert dist == pytest.approx(1e-8, rel=1e-12)


def test_nearest_point_symmetry_and_inside():
    with pytest.raises(SymmetryError):
        nearest_boundary_point(H1, [-0.1, 0.1j])
    with pytest.raises(DomainError):
        nearest_boundary_point(H1, [0.1, 0.0])


@pytest.mark.parametrize("m, log_d", [(1, -100.0), (2, -1e4)])
def test_tangential_radius_normal(m, log_d):
    d = HartogsFlat(Profile(m), n=1)
    assert tangential_radius(d, log_d=log_d) == pytest.approx(0.1, rel=1e-12)


@given(st.floats(-600, -5))
def test_tangential_radius_closed_form(log_d):
    assert tangential_radius(H1, log_d=log_d) == pytest.approx(math.sqrt(-1 / log_d), rel=1e-10)


def test_tangential_radius_guard():
    with pytest.raises(RootBracketError):
        tangential_radius(H1, dist=0.5)
    with pytest.raises(DomainError):
        tangential_radius(H1, dist=0.0)


def test_decompose_examples():
    e1, e2 = np.eye(2)
    t = decompose_vector(e1, e1)
    assert np.allclose(t.xi_normal, e1) and np.allclose(t.xi_tangent, 0)
    t = decompose_vector((e1 + e2) / math.sqrt(2), e1)
    assert t.norm_normal == pytest.approx(t.norm_tangent) == pytest.approx(1 / math.sqrt(2))
    g, A = grad_rho(H1, [-math.exp(-4), 0.5])
    t = decompose_vector(e2, g / A)
    assert t.norm_normal == pytest.approx(g[1] / A)
    with pytest.raises(NormalizationError):
        decompose_vector(e1, 2 * e1)


@given(
    st.lists(st.complex_numbers(max_magnitude=10), min_size=3, max_size=3),
    st.lists(st.complex_numbers(max_magnitude=10), min_size=3, max_size=3),
)
def test_decompose_orthogonal(xi, n):
    n = np.array(n)
    if np.linalg.norm(n) < 1e-3:
        return
    n = n / np.linalg.norm(n)
    t = decompose_vector(xi, n)
    assert np.allclose(t.xi_normal + t.xi_tangent, xi)
    assert abs(np.vdot(n, t.xi_tangent)) < 1e-10 * max(1, np.linalg.norm(xi))


@given(st.floats(1e-6, 0.05), st.floats(0.5, 3.0), st.sampled_from([1.0, 2.0, 3.0]))
def test_cone_curve_inside(t, alpha, N):
    curve = ConeCurve(alpha=alpha, N=N, direction=(1.0,), schedule="default")
    q = curve.point(t)
    assert curve.in_cone(q)
    assert rho(H1, q) < 0


def test_cone_curve_validation():
    with pytest.raises(DomainError):
        ConeCurve(direction=(0.0,))
    with pytest.raises(DomainError):
        ConeCurve(schedule="spiral")
    assert ConeCurve(schedule="normal").radius(0.1) == 0.0
