import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from flatlab.bergman import closed_form_model, metric_report, product_targets
from flatlab.errors import KindError, RankError
from flatlab.extremal import (
    estimate_I,
    estimate_lambda,
    estimate_lambda_k,
    estimate_M_N_L,
    identity_residuals,
    monomial_basis,
)
from flatlab.geometry import HartogsFlat, ProductDiscBall, UnitBall, UnitDisc


def report(domain, z, xi):
    return metric_report(closed_form_model(domain), z, xi)


def test_disc_lambda_example():
    est = estimate_lambda_k(monomial_basis(UnitDisc(), 6), [0], 0)
    assert est.value == pytest.approx(2 / math.pi, rel=1e-14)
    # maximizer sqrt(2/pi) z is the degree-one orthonormal monomial
    assert abs(est.coefficients[1]) == pytest.approx(1.0)


@pytest.mark.parametrize("n", [1, 2])
def test_product_values_at_origin(n):
    nu = n + 1
    dom = ProductDiscBall(n)
    basis = monomial_basis(dom, 6)
    z = np.zeros(nu)
    xi = np.eye(nu)[0]
    rep = report(dom, z, xi)
    k = product_targets(n)["kappa"]
    assert estimate_lambda(basis, z).value == pytest.approx(k ** (nu + 1) * product_targets(n)["J"], rel=1e-12)
    assert estimate_I(basis, z, xi, rep.G).value == pytest.approx(2 * k * (n + 3), rel=1e-12)
    L = estimate_M_N_L(basis, z, rep.G, rep.kappa, xi)["L"].value
    assert L == pytest.approx(k * (nu * nu + nu + n + 1), rel=1e-12)


def _points(rng, dim, count=5, rmax=0.5):
    pts = [np.zeros(dim, dtype=complex)]
    for _ in range(count):
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        pts.append(v / np.linalg.norm(v) * rmax * rng.uniform() ** (1 / (2 * dim)))
    return pts


@pytest.mark.parametrize("domain", [UnitDisc(), UnitBall(2)])
def test_identities_hold(domain, rng):
    dim = domain.ambient_dim
    basis = monomial_basis(domain, 28)
    for z in _points(rng, dim):
        xi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        res = identity_residuals(report(domain, z, xi), basis)
        assert max(res.values()) < 1e-6, res


def test_trace_differs_from_top_for_ball():
    # for nu >= 2 only the trace over the constrained space matches R
    dom = UnitBall(2)
    z, xi = np.zeros(2), np.array([1.0, 0.0])
    est = estimate_I(monomial_basis(dom, 6), z, xi, report(dom, z, xi).G)
    assert est.value == pytest.approx(24 / math.pi**2, rel=1e-12)
    assert est.top == pytest.approx(16 / math.pi**2, rel=1e-12)


def test_monotone_and_cauchy_in_degree():
    dom, z, xi = UnitBall(2), np.array([0.2, -0.1j]), np.array([1.0, 0.5])
    G = report(dom, z, xi).G
    prev = None
    for deg in (4, 6, 8, 10, 12):
        b = monomial_basis(dom, deg)
        cur = (
            estimate_lambda(b, z).value,
            estimate_I(b, z, xi, G).value,
            estimate_M_N_L(b, z, G, 1.0)["L"].value,
        )
        if prev is not None:
            assert all(c >= p * (1 - 1e-13) for c, p in zip(cur, prev))
        if deg == 12:
            assert all(abs(c - p) / c < 1e-6 for c, p in zip(cur, prev))
        prev = cur


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_I_quadratic_in_xi(c):
    dom, z = UnitBall(2), np.array([0.1, 0.2])
    xi = np.array([0.3, 1.0 - 0.2j])
    b = monomial_basis(dom, 6)
    G = report(dom, z, xi).G
    assert estimate_I(b, z, c * xi, G).value == pytest.approx(
        abs(c) ** 2 * estimate_I(b, z, xi, G).value, rel=1e-10
    )


def test_domain_monotonicity():
    z, xi = np.array([0.3 + 0.1j]), np.array([1.0])
    small, big = UnitDisc(), UnitDisc(1.2)
    vals = {}
    for dom in (small, big):
        b = monomial_basis(dom, 24)
        rep = report(dom, z, xi)
        mnl = estimate_M_N_L(b, z, rep.G, rep.kappa, xi)
        vals[dom] = (estimate_lambda(b, z).value, mnl["M"].value, mnl["N"].value)
    assert all(s > g for s, g in zip(vals[small], vals[big]))


def test_unitary_invariance(rng):
    dom = UnitBall(2)
    b = monomial_basis(dom, 16)
    U = unitary_group.rvs(2, random_state=3)
    z, xi = np.array([0.2, 0.1 - 0.3j]), np.array([1.0, 0.4j])
    out = []
    for zz, vv in ((z, xi), (U @ z, U @ xi)):
        rep = report(dom, zz, vv)
        mnl = estimate_M_N_L(b, zz, rep.G, rep.kappa, vv)
        out.append(
            np.array(
                [
                    estimate_lambda(b, zz).value,
                    estimate_I(b, zz, vv, rep.G).value,
                    mnl["M"].value,
                    mnl["N"].value,
                ]
            )
        )
    assert np.allclose(out[0], out[1], rtol=1e-8)


def test_errors():
    with pytest.raises(RankError):
        estimate_lambda_k(monomial_basis(UnitBall(2), 0), [0, 0], 1)
    with pytest.raises(KindError):
        monomial_basis(HartogsFlat(), 4)
