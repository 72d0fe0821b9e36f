import math
import warnings

import numpy as np
import pytest

from flatlab.bergman import metric_report, report_from_jets
from flatlab.errors import DomainError, KindError, ResolutionWarning, TruncationWarning
from flatlab.geometry import HartogsFlat, ProductDiscBall
from flatlab.hartogs import (
    EngineConfig,
    FiberWeight,
    build_kernel,
    flat_fiber_jets,
    flat_fiber_kappa,
    half_disc_kernel,
    mode_kernel,
    mode_weight,
)
from flatlab.jets import log_jets
from flatlab.profile import Profile

H1 = HartogsFlat(Profile(1), n=1)


def test_mode_weight_examples():
    p = Profile(1)
    assert mode_weight(p, H1, 0, -0.5) == pytest.approx(math.pi)
    assert mode_weight(p, H1, 0, -math.exp(-100)) == pytest.approx(math.pi * 0.01, rel=1e-12)
    assert mode_weight(p, H1, 1, -math.exp(-100)) == pytest.approx(math.pi * 1e-4 / 2, rel=1e-12)
    assert mode_weight(None, (1.0, 0.5), 2, -0.1) == pytest.approx(math.pi * 0.5**6 / 3)
    with pytest.raises(DomainError):
        mode_weight(p, H1, 0, 0.1)


def test_fiber_weight_kink():
    w = FiberWeight(Profile(1), 1.0, 1.0)
    assert w.kink == pytest.approx(-math.exp(-1))
    x = np.array([-0.5, -0.3, -1e-5])
    r2 = w.rmax2(x)
    assert r2[0] == 1.0 and r2[1] == pytest.approx(-1 / math.log(0.3))
    assert np.all(np.diff(r2) < 0)
    assert FiberWeight(None).kink == -math.inf


def test_engine_config_validation():
    with pytest.raises(DomainError):
        EngineConfig(kmax=1)
    with pytest.raises(DomainError):
        EngineConfig(quad_levels=-1)
    assert EngineConfig(quad_levels=2).order == 40


def test_half_disc_map():
    th = np.linspace(-1.5, 1.5, 7)
    inside = -0.5 * np.exp(1j * th)
    from flatlab.hartogs import _cayley_half_disc

    g, _ = _cayley_half_disc(inside)
    assert np.all(np.abs(g) < 1)
    g, _ = _cayley_half_disc(-np.exp(1j * th))
    assert np.allclose(np.abs(g), 1)
    g, _ = _cayley_half_disc(1j * np.linspace(-0.9, 0.9, 7))
    assert np.allclose(np.abs(g), 1)
    # Hermitian in (z, w)
    z, w = -0.3 + 0.2j, -0.1 - 0.5j
    assert half_disc_kernel(z, w) == pytest.approx(np.conj(half_disc_kernel(w, z)))


def test_build_errors():
    with pytest.raises(KindError):
        build_kernel(ProductDiscBall(1))
    with pytest.raises(DomainError):
        build_kernel(HartogsFlat(Profile(1), n=2))
    with pytest.raises(DomainError):
        build_kernel()


def test_truncation_warning_small_basis():
    with pytest.warns(TruncationWarning):
        build_kernel(config=EngineConfig(dmax=4, kmax=2, rational=False), flat_fiber=True)


# the cases below share session-scoped kernel builds (tens of seconds each)


@pytest.mark.slow
def test_flat_fiber_oracle(flat_fiber_kernel):
    kern = flat_fiber_kernel
    assert kern.diagnostics["degree_delta"] < 1e-7
    z = np.array([-0.3, 0.1])
    assert kern.kappa(z) == pytest.approx(flat_fiber_kappa(z), rel=1e-6)
    xi = np.array([1.0, 0.0])
    rep = report_from_jets(kern.jets(z), z, xi)
    ref = report_from_jets(flat_fiber_jets(z), z, xi)
    assert np.allclose(rep.G, ref.G, rtol=1e-6, atol=1e-6 * np.abs(ref.G).max())
    assert rep.J == pytest.approx(ref.J, rel=1e-6)


@pytest.mark.slow
def test_mode_kernel_matches_half_disc(flat_fiber_kernel):
    s0 = flat_fiber_kernel.spaces[0]
    for z, w in [(-0.3, -0.3), (-0.2 + 0.4j, -0.5 - 0.1j), (-0.05, -0.3 - 0.6j), (-1e-4, -0.01 + 0.005j)]:
        # w_0 = pi for the unit fiber disc
        ref = half_disc_kernel(z, w) / math.pi
        assert mode_kernel(s0, z, w) == pytest.approx(ref, rel=1e-6)


@pytest.mark.slow
def test_positivity(hartogs_kernel, rng):
    r = 0.98 * np.sqrt(rng.uniform(size=50))
    th = rng.uniform(-math.pi / 2, math.pi / 2, size=50)
    z1 = -r * np.exp(1j * th)
    diag = hartogs_kernel.mode_diagonals(z1)
    assert np.all(diag > 0)


@pytest.mark.slow
def test_jets_hermitian_and_z2_derivatives(hartogs_kernel):
    z = np.array([-0.2 + 0.1j, 0.0])
    jets = hartogs_kernel.jets(z)
    G = jets[(1, 1)]
    assert np.max(np.abs(G - G.conj().T)) <= 1e-9 * np.abs(G).max()
    T = jets[(2, 2)]
    assert np.max(np.abs(T - np.conj(np.transpose(T, (2, 3, 0, 1))))) <= 1e-9 * np.abs(T).max()
    K0, K1, K2 = hartogs_kernel.mode_diagonals(z[0])
    psi = log_jets(jets)
    assert psi["11"][1, 1].real == pytest.approx(K1 / K0, rel=1e-12)
    assert psi["22"][1, 1, 1, 1].real == pytest.approx(4 * K2 / K0 - 2 * (K1 / K0) ** 2, rel=1e-10)


@pytest.mark.slow
def test_reproducing_property(hartogs_kernel):
    kern = hartogs_kernel
    space = kern.spaces[1]
    w = -0.3 + 0.2j
    ew = space.values(w)
    f = lambda x: x**2 + 0.5 * x - 0.1j
    total, gram = 0.0, 0.0
    for z, a in kern.quadrature():
        mu = a * kern.weight(z.real, 1)
        E = space.values(z)
        total += np.sum(f(z) * np.conj(E @ np.conj(ew)) * mu)
        gram = gram + (E.T * mu) @ E.conj()
    assert abs(total - f(w)) <= 1e-6 * abs(f(w))
    assert np.max(np.abs(gram - np.eye(space.rank))) < 1e-6


@pytest.mark.slow
def test_domain_monotonicity(hartogs_kernel):
    small = build_kernel(HartogsFlat(Profile(1), n=1, r1=0.8, r2=0.8), EngineConfig(kmax=2))
    for z in ([-0.3, 0.1], [-0.1 + 0.2j, 0.05], [-0.5, 0.0]):
        assert small.kappa(z) > hartogs_kernel.kappa(z)


@pytest.mark.slow
def test_quadrature_refinement(flat_fiber_kernel):
    fine = build_kernel(
        config=EngineConfig(dmax=20, kmax=2, quad_levels=1), flat_fiber=True
    )

    def gram(kern):
        R = kern.r_factor
        G = R.conj().T @ R
        d = np.sqrt(np.real(np.diag(G)))
        return G / np.outer(d, d), d

    G0, d0 = gram(flat_fiber_kernel)
    G1, d1 = gram(fine)
    assert np.max(np.abs(d1 / d0 - 1)) < 1e-9
    assert np.max(np.abs(G1 - G0)) < 1e-9


@pytest.mark.slow
def test_hartogs_metric_is_sane(hartogs_kernel):
    z = np.array([-0.05, 0.0])
    rep = metric_report(hartogs_kernel.model(), z, np.array([1.0, 0.0]))
    assert np.all(np.linalg.eigvalsh(rep.G) > 0)
    assert hartogs_kernel.tail_estimate(z) == 0.0
    with pytest.raises(DomainError):
        hartogs_kernel.jets(np.array([0.1, 0.0]))
    with pytest.raises(DomainError):
        hartogs_kernel.jets(np.array([-1e-3, 0.9]))


@pytest.mark.slow
def test_resolution_region(flat_fiber_kernel):
    kern = flat_fiber_kernel
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(400):
        z1 = -0.8 * math.sqrt(rng.uniform()) * np.exp(1j * rng.uniform(-1.5, 1.5))
        if kern.resolved(z1):
            ref = half_disc_kernel(z1).real / math.pi
            worst = max(worst, abs(kern.spaces[0].diagonal(z1) - ref) / ref)
    assert worst < 1e-8
    assert kern.resolved(-1e-12) and not kern.resolved(-0.01 - 0.6j)
    with pytest.warns(ResolutionWarning):
        kern.kappa([-0.01 - 0.6j, 0.0])
    with warnings.catch_warnings():
        warnings.simplefilter("error", ResolutionWarning)
        kern.kappa([-0.01 + 0.005j, 0.0])
