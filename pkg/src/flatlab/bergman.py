"""Bergman kernels of model domains and the invariants built from them.

Throughout, nu is the ambient complex dimension. The metric is
g_{j hbar} = d_j dbar_h log kappa, the curvature tensor is
R_{hbar j k lbar} = -d_k dbar_l g_{j hbar} + g^{nu mubar} (d_k g_{j mubar}) (dbar_l g_{nu hbar}),
and the scalar invariants are the Ricci curvature R(z; xi), the scalar
curvature S, J = det G / kappa and the Kobayashi-Fuks length
B(xi) sqrt((nu + 1) - R(z; xi)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from flatlab.errors import DomainError, KindError, SingularMetric
from flatlab.geometry import HartogsFlat, ProductDiscBall, UnitBall, UnitDisc
from flatlab.jets import KernelJets, leibniz, log_jets

__all__ = [
    "LeftHalfPlane",
    "KernelModel",
    "MetricReport",
    "kernel_closed_form",
    "closed_form_jets",
    "closed_form_model",
    "metric_report",
    "monge_ampere",
    "ramadanov_field",
    "TRANSFORM_WEIGHTS",
    "transform_under_biholomorphism",
    "product_targets",
]


@dataclass(frozen=True)
class LeftHalfPlane:
    """{Re z < 0} in C; used for transformation-law checks only."""

    @property
    def ambient_dim(self) -> int:
        return 1

    def contains(self, z) -> bool:
        return bool(np.asarray(z, dtype=complex).reshape(-1)[0].real < 0)


def _blocks(domain):
    """Reinhardt blocks (constant, power, radius^2, index slice) with K = prod c (1 - <z,w>_B / R^2)^-p."""
    if isinstance(domain, UnitDisc):
        r2 = domain.radius**2
        return [(1.0 / (math.pi * r2), 2, r2, slice(0, 1))]
    if isinstance(domain, UnitBall):
        n, r2 = domain.n, domain.radius**2
        return [(math.factorial(n) / (math.pi**n * r2**n), n + 1, r2, slice(0, n))]
    if isinstance(domain, ProductDiscBall):
        n = domain.n
        return [
            (1.0 / math.pi, 2, 1.0, slice(0, 1)),
            (math.factorial(n) / math.pi**n, n + 1, 1.0, slice(1, n + 1)),
        ]
    if isinstance(domain, HartogsFlat):
        raise KindError("no closed form for HartogsFlat; use flatlab.hartogs")
    raise KindError(f"no closed-form kernel for {type(domain).__name__}")


def kernel_closed_form(domain, z, w):
    """K(z, w) for the disc, ball, product and left half-plane.

    Written with plain arithmetic on sequences so that mpmath numbers work too.
    """
    z = list(np.atleast_1d(z)) if not isinstance(z, (list, tuple)) else list(z)
    w = list(np.atleast_1d(w)) if not isinstance(w, (list, tuple)) else list(w)
    if isinstance(domain, LeftHalfPlane):
        s = z[0] + w[0].conjugate()
        return 1 / (math.pi * s * s)
    out = 1
    for c, p, r2, sl in _blocks(domain):
        inner = 0
        for zi, wi in zip(z[sl], w[sl]):
            inner = inner + zi * wi.conjugate()
        out = out * c * (1 - inner / r2) ** (-p)
    return out


def _block_jets(nu, c, p, r2, sl, z):
    """Jets of F(s) = c (1 - s/R^2)^-p with s = sum over the block of |z_i|^2."""
    mask = np.zeros(nu)
    mask[sl] = 1.0
    zb = np.conj(z) * mask
    zz = z * mask
    D = np.diag(mask).astype(complex)
    s = float(np.sum(np.abs(z[sl]) ** 2))
    base = 1 - s / r2
    if not base > 0:
        raise DomainError("point outside the domain")
    F = [c * base ** (-p)]
    coef = 1.0
    for q in range(1, 5):
        coef *= (p + q - 1) / r2
        F.append(c * coef * base ** (-p - q))
    e = np.einsum
    t = {
        (0, 0): np.asarray(F[0], dtype=complex),
        (1, 0): F[1] * zb,
        (0, 1): F[1] * zz,
        (2, 0): F[2] * e("j,k->jk", zb, zb),
        (0, 2): F[2] * e("h,l->hl", zz, zz),
        (1, 1): F[2] * e("j,h->jh", zb, zz) + F[1] * D,
        (2, 1): F[3] * e("j,k,h->jkh", zb, zb, zz)
        + F[2] * (e("jh,k->jkh", D, zb) + e("kh,j->jkh", D, zb)),
        (1, 2): F[3] * e("j,h,l->jhl", zb, zz, zz)
        + F[2] * (e("jh,l->jhl", D, zz) + e("jl,h->jhl", D, zz)),
        (2, 2): F[4] * e("j,k,h,l->jkhl", zb, zb, zz, zz)
        + F[3]
        * (
            e("jh,k,l->jkhl", D, zb, zz)
            + e("jl,k,h->jkhl", D, zb, zz)
            + e("kh,j,l->jkhl", D, zb, zz)
            + e("kl,j,h->jkhl", D, zb, zz)
        )
        + F[2] * (e("jh,kl->jkhl", D, D) + e("jl,kh->jkhl", D, D)),
    }
    return KernelJets(nu=nu, table=t)


def _half_plane_jets(z):
    # kappa = (z + zbar)^-2 / pi; d and dbar act identically on a function of z + zbar
    x2 = 2 * z[0].real
    t = {}
    for a in range(3):
        for b in range(3):
            q = a + b
            coef = 1.0
            for i in range(q):
                coef *= -(2 + i)
            t[(a, b)] = np.full((1,) * q, coef * x2 ** (-2 - q) / math.pi, dtype=complex)
    return KernelJets(nu=1, table=t)


def closed_form_jets(domain, z) -> KernelJets:
    """Analytic diagonal jets of kappa up to bidegree (2, 2)."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    if isinstance(domain, LeftHalfPlane):
        if not z[0].real < 0:
            raise DomainError("point outside the half-plane")
        return _half_plane_jets(z)
    nu = domain.ambient_dim
    blocks = _blocks(domain)
    jets = _block_jets(nu, *blocks[0], z)
    for blk in blocks[1:]:
        jets = leibniz(jets, _block_jets(nu, *blk, z))
    return jets


@dataclass(frozen=True)
class KernelModel:
    """A diagonal kernel jet evaluator on a domain."""

    domain: object
    evaluator: Callable[[np.ndarray], KernelJets]
    source: str = "closed-form"

    def jets(self, z) -> KernelJets:
        return self.evaluator(np.asarray(z, dtype=complex).reshape(-1))

    def kappa(self, z) -> float:
        return self.jets(z).value


def closed_form_model(domain) -> KernelModel:
    if not isinstance(domain, LeftHalfPlane):
        _blocks(domain)
    return KernelModel(domain, lambda z: closed_form_jets(domain, z), "closed-form")


@dataclass
class MetricReport:
    """Invariants at one point and one tangent vector."""

    z: np.ndarray
    xi: np.ndarray
    kappa: float
    G: np.ndarray
    Ginv: np.ndarray
    detG: float
    B: float
    curvature: np.ndarray
    ricci: float
    scalar: float
    J: float
    MF: float

    @property
    def nu(self) -> int:
        return self.G.shape[0]

    def adjugate(self) -> np.ndarray:
        return self.detG * self.Ginv


def _curvature(psi, Ginv):
    # g^{nu mubar} = Ginv[mu, nu]
    corr = np.einsum("mn,jkm,hln->hjkl", Ginv, psi["21"], np.conj(psi["21"]))
    return -np.transpose(psi["22"], (2, 0, 1, 3)) + corr


def metric_report(km: KernelModel, z, xi) -> MetricReport:
    """All invariants of the Bergman metric at z along xi."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    jets = km.jets(z)
    return report_from_jets(jets, z, xi)


def report_from_jets(jets: KernelJets, z, xi) -> MetricReport:
    nu = jets.nu
    if xi.shape[0] != nu:
        raise DomainError("tangent vector has the wrong dimension")
    if not np.any(xi):
        raise DomainError("tangent vector must be nonzero")
    kappa = jets.value
    psi = log_jets(jets)
    G = psi["11"]
    G = 0.5 * (G + G.conj().T)
    try:
        cf = cho_factor(G, lower=True)
    except LinAlgError as exc:
        raise SingularMetric("metric matrix is not positive definite") from exc
    Ginv = cho_solve(cf, np.eye(nu, dtype=complex))
    Ginv = 0.5 * (Ginv + Ginv.conj().T)
    detG = float(np.prod(np.real(np.diag(cf[0]))) ** 2)
    curv = _curvature(psi, Ginv)
    B2 = float(np.real(np.einsum("j,jh,h->", xi, G, np.conj(xi))))
    ric_tensor = np.einsum("lk,hjkl->jh", Ginv, curv)
    ricci = float(np.real(np.einsum("jh,j,h->", ric_tensor, xi, np.conj(xi)))) / B2
    scalar = float(np.real(np.einsum("hj,lk,hjkl->", Ginv, Ginv, curv)))
    B = math.sqrt(B2)
    return MetricReport(
        z=z,
        xi=xi,
        kappa=kappa,
        G=G,
        Ginv=Ginv,
        detG=detG,
        B=B,
        curvature=curv,
        ricci=ricci,
        scalar=scalar,
        J=detG / kappa,
        MF=B * math.sqrt((nu + 1) - ricci),
    )


def monge_ampere(value, grad, hess) -> float:
    """(-1)^nu det [[u, u_kbar], [u_j, u_{j kbar}]] for a real function u.

    ``grad`` holds the holomorphic derivatives u_j, ``hess`` the mixed
    derivatives u_{j kbar}.
    """
    grad = np.asarray(grad, dtype=complex).reshape(-1)
    hess = np.asarray(hess, dtype=complex)
    nu = grad.shape[0]
    M = np.empty((nu + 1, nu + 1), dtype=complex)
    M[0, 0] = value
    M[0, 1:] = np.conj(grad)
    M[1:, 0] = grad
    M[1:, 1:] = hess
    return float(np.real((-1) ** nu * np.linalg.det(M)))


def ramadanov_field(jets: KernelJets):
    """Value, gradient and complex Hessian of u = kappa^(-1/(nu+1))."""
    nu = jets.nu
    alpha = -1.0 / (nu + 1)
    k = jets.value
    kj = jets[(1, 0)]
    kjh = jets[(1, 1)]
    u = k**alpha
    grad = alpha * k ** (alpha - 1) * kj
    hess = alpha * k ** (alpha - 1) * kjh + alpha * (alpha - 1) * k ** (alpha - 2) * np.outer(
        kj, np.conj(kj)
    )
    return u, grad, hess


# weight w with Q_D1(z) = |det f'(z)|^w Q_D2(f(z)) for a biholomorphism f: D1 -> D2
TRANSFORM_WEIGHTS = {
    "kappa": lambda nu: 2,
    "lambda": lambda nu: 2 * (nu + 1),
    "I": lambda nu: 2,
    "M": lambda nu: 2 * (nu + 1),
    "N": lambda nu: 2 * (2 * nu + 1),
    "L": lambda nu: 2,
    "J": lambda nu: 0,
    "R": lambda nu: 0,
    "S": lambda nu: 0,
}


def transform_under_biholomorphism(quantity: str, value: float, jac_det: complex, nu: int):
    """Pull a quantity computed on the target domain back along f.

    Parameters
    ----------
    quantity : str
        One of ``TRANSFORM_WEIGHTS``.
    value : float
        The quantity on the target domain at f(z).
    jac_det : complex
        det f'(z).
    """
    if quantity not in TRANSFORM_WEIGHTS:
        raise DomainError(f"unknown quantity {quantity!r}")
    return value * abs(jac_det) ** TRANSFORM_WEIGHTS[quantity](nu)


def product_targets(n: int, xi=None) -> dict:
    """Exact values of the invariants of the disc times B_n at the origin."""
    out = {
        "kappa": math.factorial(n) / math.pi ** (n + 1),
        "J": 2 * math.pi ** (n + 1) * (n + 1) ** n / math.factorial(n),
        "R": -1.0,
        "S": -(n + 1.0),
    }
    if xi is not None:
        xi = np.asarray(xi, dtype=complex)
        b2 = 2 * abs(xi[0]) ** 2 + (n + 1) * float(np.sum(np.abs(xi[1:]) ** 2))
        out["MF"] = math.sqrt(n + 3) * math.sqrt(b2)
        out["MK"] = max(abs(xi[0]), float(np.linalg.norm(xi[1:])))
    return out
