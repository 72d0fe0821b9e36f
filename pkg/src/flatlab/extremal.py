"""Finite-basis estimates of the extremal quantities lambda^k, lambda, I, M, N, L.

All quantities are built from unit-norm holomorphic f with f(z) = 0 (and
f'(z) = 0 for the second-order ones). In an orthonormal basis f = sum c_a e_a
has norm |c|, so each quantity is a Hermitian form in c restricted to the
null space of the constraint rows.

For lambda^k the form has rank one and its maximum is its trace. For the
second-order forms (I, M, L, N) the value that satisfies the curvature
identities is the trace of the form over the constrained subspace, i.e. the
sum over an orthonormal basis of {f : f(z) = 0, f'(z) = 0}; the single-function
maximum (top eigenvalue) agrees with it only when the form has rank one, as
for nu = 1. Both are reported.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, null_space

from flatlab.errors import DomainError, KindError, RankError
from flatlab.geometry import ProductDiscBall, UnitBall, UnitDisc

__all__ = [
    "ExtremalEstimate",
    "MonomialBasis",
    "monomial_basis",
    "estimate_lambda_k",
    "estimate_lambda",
    "estimate_I",
    "estimate_M_N_L",
    "identity_residuals",
]


def _multi_indices(dim, degree):
    out = [a for a in itertools.product(range(degree + 1), repeat=dim) if sum(a) <= degree]
    out.sort(key=lambda a: (sum(a), a))
    return np.array(out, dtype=int)


def _ball_norm2(alpha, radius):
    n = alpha.shape[1]
    k = alpha.sum(axis=1)
    fact = np.array([math.prod(math.factorial(int(x)) for x in row) for row in alpha], float)
    lg = np.array([math.lgamma(n + int(s) + 1) for s in k])
    return math.pi**n * fact * np.exp((2 * k + 2 * n) * math.log(radius) - lg)


@dataclass(frozen=True)
class MonomialBasis:
    """Orthonormal monomials e_a = z^a / |z^a| on a Reinhardt model domain."""

    exponents: np.ndarray
    norms: np.ndarray
    degree: int

    @property
    def dim(self) -> int:
        return self.exponents.shape[1]

    @property
    def size(self) -> int:
        return self.exponents.shape[0]

    def jets(self, z):
        """Values, gradients and Hessians of all basis functions at z.

        Returns
        -------
        v : (size,) ndarray
        d1 : (size, dim) ndarray
        d2 : (size, dim, dim) ndarray
        """
        z = np.asarray(z, dtype=complex).reshape(-1)
        E = self.exponents
        nu = self.dim

        def pw(shift):
            # prod_i c_i z_i^(E_i - shift_i) with falling-factorial coefficients
            e = E - shift
            coef = np.ones(E.shape[0])
            for i in range(nu):
                for s in range(shift[i]):
                    coef = coef * (E[:, i] - s)
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = np.where(e >= 0, z[None, :] ** np.maximum(e, 0), 0.0)
            return coef * np.prod(vals, axis=1)

        zero = np.zeros(nu, dtype=int)
        v = pw(zero)
        d1 = np.empty((E.shape[0], nu), dtype=complex)
        d2 = np.empty((E.shape[0], nu, nu), dtype=complex)
        for i in range(nu):
            s = zero.copy()
            s[i] += 1
            d1[:, i] = pw(s)
            for j in range(i, nu):
                s2 = s.copy()
                s2[j] += 1
                d2[:, i, j] = d2[:, j, i] = pw(s2)
        inv = 1.0 / self.norms
        return v * inv, d1 * inv[:, None], d2 * inv[:, None, None]


def monomial_basis(domain, degree: int) -> MonomialBasis:
    """Monomials of total degree <= ``degree``, normalized in L^2(domain)."""
    if isinstance(domain, UnitDisc):
        E = _multi_indices(1, degree)
        norms2 = _ball_norm2(E, domain.radius)
    elif isinstance(domain, UnitBall):
        E = _multi_indices(domain.n, degree)
        norms2 = _ball_norm2(E, domain.radius)
    elif isinstance(domain, ProductDiscBall):
        E = _multi_indices(domain.n + 1, degree)
        norms2 = _ball_norm2(E[:, :1], 1.0) * _ball_norm2(E[:, 1:], 1.0)
    else:
        raise KindError(f"no monomial basis for {type(domain).__name__}")
    return MonomialBasis(exponents=E, norms=np.sqrt(norms2), degree=degree)


@dataclass
class ExtremalEstimate:
    quantity: str
    value: float
    basis_degree: int
    constraint_rank: int
    coefficients: np.ndarray = field(repr=False, default=None)
    top: float | None = None


def _null_space(rows, tol=1e-12):
    C = np.atleast_2d(rows)
    s = np.linalg.svd(C, compute_uv=False)
    rank = int(np.sum(s > tol * max(s[0], 1.0)))
    if rank < C.shape[0]:
        raise RankError(f"{C.shape[0]} constraints but rank {rank}")
    return null_space(C, rcond=tol), rank


def _restricted(X, Z):
    """Trace, top eigenvalue and top eigenvector of the Hermitian form X on range(Z)."""
    H = Z.conj().T @ X @ Z
    H = 0.5 * (H + H.conj().T)
    w, V = eigh(H)
    return float(np.sum(w)), float(w[-1]), Z @ V[:, -1]


def estimate_lambda_k(basis: MonomialBasis, z, k: int) -> ExtremalEstimate:
    """sup |d_k f(z)|^2 over unit f with f(z) = 0 and d_j f(z) = 0 for j < k (0-based k)."""
    v, d1, _ = basis.jets(z)
    if not 0 <= k < basis.dim:
        raise DomainError("derivative index out of range")
    rows = np.vstack([v[None, :], d1[:, :k].T])
    Z, rank = _null_space(rows)
    a = d1[:, k]
    u = a @ Z
    value = float(np.vdot(u, u).real)
    coef = Z @ np.conj(u) / math.sqrt(value) if value > 0 else np.zeros(basis.size)
    return ExtremalEstimate("lambda_k", value, basis.degree, rank, coef, value)


def estimate_lambda(basis: MonomialBasis, z) -> ExtremalEstimate:
    parts = [estimate_lambda_k(basis, z, k) for k in range(basis.dim)]
    value = math.prod(p.value for p in parts)
    return ExtremalEstimate("lambda", value, basis.degree, parts[-1].constraint_rank, top=value)


def _second_order_space(basis, z):
    v, d1, d2 = basis.jets(z)
    Z, rank = _null_space(np.vstack([v[None, :], d1.T]))
    return d2, Z, rank


def _I_form(d2, xi, Ginv):
    # value = sum_{a,b} c_a conj(c_b) P[a,b] with P = B conj(Ginv) B^H
    Bm = np.einsum("j,aji->ai", xi, d2)
    P = Bm @ np.conj(Ginv) @ Bm.conj().T
    return P.T


def _L_form(d2, Ginv):
    # value = sum c_a conj(c_b) tr(H_a conj(Ginv) conj(H_b) Ginv)
    T = np.einsum("aij,jk,bkl,li->ab", d2, np.conj(Ginv), np.conj(d2), Ginv)
    return T.T


def estimate_I(basis: MonomialBasis, z, xi, G) -> ExtremalEstimate:
    """sup xi f''(z) conj(G)^-1 conj(f''(z)) xi^* over unit f with f(z) = 0, f'(z) = 0."""
    d2, Z, rank = _second_order_space(basis, z)
    Ginv = np.linalg.inv(np.asarray(G, dtype=complex))
    value, top, coef = _restricted(_I_form(d2, np.asarray(xi, dtype=complex), Ginv), Z)
    return ExtremalEstimate("I", value, basis.degree, rank, coef, top)


def estimate_M_N_L(basis: MonomialBasis, z, G, kappa: float, xi=None) -> dict:
    """Estimates of L and N, and of M when ``xi`` is given.

    M uses the weight kappa^(nu-1) with the adjugate det(G) G^-1 in place of
    G^-1; N uses kappa^(2nu-2) with the adjugate in both trace slots, which
    makes N = kappa^(2nu) J^2 L.
    """
    G = np.asarray(G, dtype=complex)
    nu = G.shape[0]
    d2, Z, rank = _second_order_space(basis, z)
    Ginv = np.linalg.inv(G)
    detG = float(np.linalg.det(G).real)
    out = {}
    nweight = kappa ** (2 * nu - 2) * detG**2
    lval, ltop, lcoef = _restricted(_L_form(d2, Ginv), Z)
    out["L"] = ExtremalEstimate("L", lval, basis.degree, rank, lcoef, ltop)
    out["N"] = ExtremalEstimate("N", nweight * lval, basis.degree, rank, lcoef, nweight * ltop)
    if xi is not None:
        mweight = kappa ** (nu - 1) * detG
        ival, itop, icoef = _restricted(_I_form(d2, np.asarray(xi, dtype=complex), Ginv), Z)
        out["M"] = ExtremalEstimate(
            "M", mweight * ival, basis.degree, rank, icoef, mweight * itop
        )
    return out


def identity_residuals(report, basis: MonomialBasis) -> dict:
    """Relative residuals of the identities linking J, R, S to lambda, I, L, M, N.

    ``report`` is a MetricReport for the same domain, point and vector.
    """
    nu = report.nu
    z, xi, k = report.z, report.xi, report.kappa
    lam = estimate_lambda(basis, z).value
    I = estimate_I(basis, z, xi, report.G).value
    mnl = estimate_M_N_L(basis, z, report.G, k, xi)
    L, M, N = mnl["L"].value, mnl["M"].value, mnl["N"].value
    B2 = report.B**2
    J, R, S = report.J, report.ricci, report.scalar

    def rel(a, b):
        return abs(a - b) / max(abs(b), 1e-300)

    return {
        "J_lambda": rel(lam / k ** (nu + 1), J),
        "R_I": rel((nu + 1) - I / (B2 * k), R),
        "R_M": rel((nu + 1) - M / (B2 * k ** (nu + 1) * J), R),
        "S_L": rel(nu * (nu + 1) - L / k, S),
        "S_N": rel(nu * (nu + 1) - N / (k ** (2 * nu + 1) * J**2), S),
        "I_M": rel(I, M / (k**nu * J)),
    }
