"""Model domains, the defining function, cone curves and boundary distances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from flatlab.errors import (
    ConvergenceError,
    DomainError,
    KindError,
    NormalizationError,
    RootBracketError,
    SymmetryError,
)
from flatlab.logspace import logsumexp
from flatlab.profile import Profile, phi_derivative, phi_eval

__all__ = [
    "UnitDisc",
    "UnitBall",
    "ProductDiscBall",
    "HartogsFlat",
    "ConeCurve",
    "TangentDecomposition",
    "rho",
    "grad_rho",
    "nearest_boundary_point",
    "tangential_radius",
    "decompose_vector",
]


def _as_point(z, dim):
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != dim:
        raise DomainError(f"expected a point in C^{dim}, got shape {z.shape}")
    return z


@dataclass(frozen=True)
class UnitDisc:
    """The disc of the given radius in C (radius 1 by default)."""

    radius: float = 1.0

    @property
    def ambient_dim(self) -> int:
        return 1

    def contains(self, z) -> bool:
        return bool(abs(_as_point(z, 1)[0]) < self.radius)


@dataclass(frozen=True)
class UnitBall:
    """The ball of the given radius in C^n."""

    n: int
    radius: float = 1.0

    @property
    def ambient_dim(self) -> int:
        return self.n

    def contains(self, z) -> bool:
        return bool(np.linalg.norm(_as_point(z, self.n)) < self.radius)


@dataclass(frozen=True)
class ProductDiscBall:
    """The product of the unit disc and the unit ball B_n, of dimension n + 1."""

    n: int

    @property
    def ambient_dim(self) -> int:
        return self.n + 1

    def contains(self, z) -> bool:
        z = _as_point(z, self.n + 1)
        return bool(abs(z[0]) < 1 and np.linalg.norm(z[1:]) < 1)


@dataclass(frozen=True)
class HartogsFlat:
    """Bounded truncation of {Re z1 + phi(|z'|^2) < 0} to |z1| < r1, |z'| < r2."""

    profile: Profile = field(default_factory=Profile)
    n: int = 1
    r1: float = 1.0
    r2: float = 1.0

    @property
    def ambient_dim(self) -> int:
        return self.n + 1

    def contains(self, z) -> bool:
        z = _as_point(z, self.n + 1)
        return bool(
            rho(self, z) < 0 and abs(z[0]) < self.r1 and np.linalg.norm(z[1:]) < self.r2
        )


def _require_hartogs(d):
    if not isinstance(d, HartogsFlat):
        raise KindError(f"operation defined for HartogsFlat only, got {type(d).__name__}")


def rho(d: HartogsFlat, z) -> float:
    """Defining function Re z1 + phi(|z'|^2)."""
    _require_hartogs(d)
    z = _as_point(z, d.ambient_dim)
    return float(z[0].real + phi_eval(d.profile, float(np.vdot(z[1:], z[1:]).real)))


def grad_rho(d: HartogsFlat, z):
    """Real gradient of rho at a boundary point in normal form z' = s e2, s >= 0.

    Returns
    -------
    grad : ndarray
        (1, 2 s phi'(s^2), 0, ..., 0)
    A : float
        Euclidean norm of ``grad``.
    """
    _require_hartogs(d)
    z = _as_point(z, d.ambient_dim)
    s = z[1]
    if abs(s.imag) > 0 or s.real < 0 or np.any(z[2:] != 0):
        raise SymmetryError("boundary point must have z' = s e2 with s >= 0 real")
    s = s.real
    g = np.zeros(d.ambient_dim)
    g[0] = 1.0
    g[1] = 2 * s * phi_derivative(d.profile, s * s, 1)
    return g, float(np.hypot(g[0], g[1]))


@dataclass(frozen=True)
class ConeCurve:
    """Curve q(t) approaching 0 inside the cone Re z1 < -alpha |z'|^N.

    ``schedule="default"`` gives q(t) = (-t, c t^(1/N) u') with alpha |q'|^N = t/2;
    ``schedule="normal"`` gives q(t) = (-t, 0).
    """

    alpha: float = 1.0
    N: float = 2.0
    direction: tuple = (1.0,)
    schedule: str = "default"

    def __post_init__(self):
        u = np.asarray(self.direction, dtype=complex)
        nrm = np.linalg.norm(u)
        if nrm == 0:
            raise DomainError("cone direction must be nonzero")
        object.__setattr__(self, "direction", tuple(u / nrm))
        if self.schedule not in ("default", "normal"):
            raise DomainError(f"unknown schedule {self.schedule!r}")
        if self.alpha <= 0 or self.N <= 0:
            raise DomainError("alpha and N must be positive")

    @property
    def n(self) -> int:
        return len(self.direction)

    def radius(self, t: float) -> float:
        if self.schedule == "normal":
            return 0.0
        return (t / (2 * self.alpha)) ** (1.0 / self.N)

    def point(self, t: float):
        q = np.zeros(self.n + 1, dtype=complex)
        q[0] = -t
        q[1:] = self.radius(t) * np.asarray(self.direction)
        return q

    def in_cone(self, z) -> bool:
        z = np.asarray(z, dtype=complex)
        return bool(z[0].real < -self.alpha * np.linalg.norm(z[1:]) ** self.N)


def nearest_boundary_point(d: HartogsFlat, qtilde):
    """Nearest point of {Re z1 + phi(|z'|^2) = 0} to a point (x, r, 0, ...).

    The nearest point is p = (-phi(s^2), s, 0, ...) where s minimizes
    (x + phi(s^2))^2 + (r - s)^2; the minimizer is found as the root of the
    derivative.

    Returns
    -------
    p : ndarray
    dist : float
    """
    _require_hartogs(d)
    q = _as_point(qtilde, d.ambient_dim)
    x, r = q[0].real, q[1].real
    if abs(q[0].imag) > 0 or abs(q[1].imag) > 0 or r < 0 or np.any(q[2:] != 0):
        raise SymmetryError("point must be of the form (x, r, 0, ...) with r >= 0")
    prof = d.profile
    slack = x + phi_eval(prof, r * r)
    if not slack < 0:
        raise DomainError("point is not inside the model domain")

    def half_grad(s):
        return (x + phi_eval(prof, s * s)) * 2 * s * phi_derivative(prof, s * s, 1) - (r - s)

    # moving s outward lowers the boundary toward x, so the minimizer lies in
    # [r, r + |slack|] (the distance is at most |slack|)
    if r == 0.0 or half_grad(r) >= 0.0:
        s = r
    else:
        lo, hi = r, r - slack
        for _ in range(8):
            if half_grad(hi) > 0:
                break
            hi = r + 2 * (hi - r)
        else:
            raise ConvergenceError("could not bracket the nearest boundary point")
        s = brentq(half_grad, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=400)
    # second derivative of the objective must be positive at a true minimizer
    h = max(abs(s), 1.0) * 1e-6
    f = lambda u: (x + phi_eval(prof, u * u)) ** 2 + (r - u) ** 2
    if s > h and f(s + h) + f(s - h) - 2 * f(s) < -1e-14 * max(f(s), 1e-300):
        raise ConvergenceError("stationary point of the distance is not a minimum")
    p = np.zeros(d.ambient_dim, dtype=complex)
    p[0] = -phi_eval(prof, s * s)
    p[1] = s
    dist = float(np.hypot(x + phi_eval(prof, s * s), r - s))
    return p, dist


def tangential_radius(
    d: HartogsFlat,
    dist: float | None = None,
    *,
    log_d: float | None = None,
    p2: float = 0.0,
    slope: float = 0.0,
) -> float:
    """Smallest s > 0 with (-d, s e2) on the boundary of the normalized domain.

    In the normalized coordinates the pulled-back boundary equation at
    (-d, s) reads phi(((s - a d)/A + p2)^2) = d/A + a s/A + phi(p2^2) with
    a = ``slope`` and A = sqrt(1 + a^2); it is solved in log space.

    Parameters
    ----------
    dist, log_d : float
        The distance d or its logarithm (one of them).
    p2, slope : float
        Second coordinate of the nearest boundary point and the boundary slope
        2 p2 phi'(p2^2). Zero for the normal approach.
    """
    _require_hartogs(d)
    if log_d is None:
        if dist is None or not dist > 0:
            raise DomainError("tangential radius needs d > 0")
        log_d = float(np.log(dist))
    prof = d.profile
    a = float(slope)
    A = float(np.hypot(1.0, a))
    dd = np.exp(log_d)
    log_phi_p = prof.log_phi(p2 * p2)

    def gap(s):
        arg = ((s - a * dd) / A + p2) ** 2
        terms = [log_d - np.log(A), log_phi_p]
        if a * s > 0:
            terms.append(np.log(a * s / A))
        return prof.log_phi(arg) - logsumexp(terms)

    s_max = d.r2
    if gap(s_max) <= 0:
        raise RootBracketError("no boundary crossing inside the truncation radius")
    # scan a log grid from tiny s up to s_max for the first sign change
    grid = s_max * np.logspace(-12, 0, 241)
    vals = np.array([gap(s) for s in grid])
    idx = np.flatnonzero(vals > 0)
    k = idx[0]
    if k == 0:
        lo, hi = 0.0, grid[0]
        if gap(lo) > 0:
            raise RootBracketError("boundary crossing below the resolvable scale")
    else:
        lo, hi = grid[k - 1], grid[k]
    return float(brentq(gap, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=400))


@dataclass(frozen=True)
class TangentDecomposition:
    """Split of a vector into its components along and orthogonal to a unit normal."""

    xi: np.ndarray
    xi_normal: np.ndarray
    xi_tangent: np.ndarray

    @property
    def norm_normal(self) -> float:
        return float(np.linalg.norm(self.xi_normal))

    @property
    def norm_tangent(self) -> float:
        return float(np.linalg.norm(self.xi_tangent))


def decompose_vector(xi, unit_normal, tol: float = 1e-12) -> TangentDecomposition:
    """Hermitian orthogonal split xi = <xi, n> n + rest."""
    xi = np.asarray(xi, dtype=complex)
    n = np.asarray(unit_normal, dtype=complex)
    if abs(np.linalg.norm(n) - 1.0) > tol:
        raise NormalizationError(f"|normal| = {np.linalg.norm(n)!r} is not 1")
    xn = np.vdot(n, xi) * n
    return TangentDecomposition(xi=xi, xi_normal=xn, xi_tangent=xi - xn)
