"""Per-t normalization of the flat model near its boundary point 0.

A frame moves q(t) to (-d, 0, ..., 0) by a translation in Im z1, a unitary
rotation of z', a translation to the nearest boundary point and a real
rotation aligning the normal with e1. The anisotropic dilation by
(1/d, 1/d*) followed by a Cayley map then sends the normalized domain into
the product of the disc and the ball.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import qmc
from scipy.special import ndtri

from flatlab.errors import BranchError, DomainError, PoleError
from flatlab.geometry import (
    ConeCurve,
    HartogsFlat,
    nearest_boundary_point,
    tangential_radius,
)
from flatlab.profile import phi_derivative, phi_eval

__all__ = [
    "NormalizationFrame",
    "ScaledRegion",
    "InclusionReport",
    "build_frame",
    "build_region",
    "d1_d2_radii",
    "cayley_sigma",
    "cayley_sigma_inverse",
    "peak_function",
    "certify_inclusions",
    "DEFAULT_DELTA0",
]

# half-width of W is DEFAULT_DELTA0 / 10
DEFAULT_DELTA0 = 5.0


def _fiber_rotation(u):
    """Unitary V on C^n with V u = e1 for a unit vector u."""
    n = u.shape[0]
    if n == 1:
        return np.array([[np.conj(u[0])]])
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(n, dtype=complex)]))
    q = q[:, :n]
    q[:, 0] *= np.vdot(q[:, 0], u)
    return q.conj().T


@dataclass(frozen=True)
class NormalizationFrame:
    """Scaling data at one parameter t.

    The forward map is z -> U z + b, with U unitary; it sends q(t) to
    (-d, 0, ..., 0) and the nearest boundary point to 0.
    """

    t: float
    domain: HartogsFlat
    q: np.ndarray
    qtilde: np.ndarray
    p: np.ndarray
    A: float
    slope: float
    d: float
    dstar: float
    U: np.ndarray
    b: np.ndarray
    rotation1: np.ndarray

    @property
    def log_d(self) -> float:
        return float(np.log(self.d))

    @property
    def p2(self) -> float:
        return float(self.p[1].real)

    @property
    def unit_normal(self):
        """Unit normal at the nearest boundary point, in original coordinates."""
        return self.U[0].conj()

    def forward(self, z):
        return self.U @ np.asarray(z, dtype=complex) + self.b

    def inverse(self, w):
        return self.U.conj().T @ (np.asarray(w, dtype=complex) - self.b)

    def gamma_inverse(self, w):
        """Closed form of the inverse of the boundary normalization (last two steps)."""
        w = np.asarray(w, dtype=complex)
        a, A = self.slope, self.A
        z = w.copy()
        z[..., 0] = (w[..., 0] - a * w[..., 1]) / A + self.p[0].real
        z[..., 1] = (w[..., 1] + a * w[..., 0]) / A + self.p2
        return z

    def rho_normalized(self, w):
        """Defining function pulled back to normalized coordinates (vectorized over rows)."""
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        a, A = self.slope, self.A
        prof = self.domain.profile
        arg = np.abs(w[:, 1] / A + self.p2 + a * w[:, 0] / A) ** 2
        arg = arg + np.sum(np.abs(w[:, 2:]) ** 2, axis=1)
        return (
            w[:, 0].real / A
            - (a / A) * w[:, 1].real
            - phi_eval(prof, self.p2**2)
            + phi_eval(prof, arg)
        )


def build_frame(domain: HartogsFlat, curve: ConeCurve, t: float) -> NormalizationFrame:
    """Frame at q(t) for the given cone curve."""
    if curve.n != domain.n:
        raise DomainError("curve direction dimension does not match the fiber dimension")
    q = curve.point(t)
    if not domain.contains(q):
        raise DomainError(f"q({t}) is not inside the domain")
    nu = domain.ambient_dim
    r = float(np.linalg.norm(q[1:]))
    rot1 = np.eye(nu, dtype=complex)
    if r > 0:
        rot1[1:, 1:] = _fiber_rotation(q[1:] / r)
    qtilde = np.zeros(nu, dtype=complex)
    qtilde[0] = q[0].real
    qtilde[1] = r
    p, d = nearest_boundary_point(domain, qtilde)
    s = p[1].real
    a = float(2 * s * phi_derivative(domain.profile, s * s, 1))
    A = float(np.hypot(1.0, a))
    rot2 = np.eye(nu, dtype=complex)
    rot2[:2, :2] = np.array([[1.0, a], [-a, 1.0]]) / A
    U = rot2 @ rot1
    shift = np.zeros(nu, dtype=complex)
    shift[0] = 1j * q[0].imag
    b = -rot2 @ (shift + p)
    dstar = tangential_radius(domain, log_d=float(np.log(d)), p2=s, slope=a)
    return NormalizationFrame(
        t=float(t),
        domain=domain,
        q=q,
        qtilde=qtilde,
        p=p,
        A=A,
        slope=a,
        d=d,
        dstar=dstar,
        U=U,
        b=b,
        rotation1=rot1,
    )


def d1_d2_radii(frame: NormalizationFrame, epsilon: float, w: float):
    """Upper bounds for the z'-radii of the two scaled regions.

    For kappa = 1/(1+eps) (first radius) and 1/(1+eps)^2 (second) the
    defining inequality gives phi(|z2/A + p2 + a z1/A|^2 + |z''|^2) <
    d^kappa/A + phi(p2^2) + (a/A) w on W. With Y the phi-inverse of the right
    side, |z'| <= A (sqrt(Y) + p2) + a sqrt(2) w, which is exact for a = 0.

    Returns
    -------
    (d1eps, d2eps, cap1, cap2)
        Radii, and flags telling whether the W radius w was binding.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    prof = frame.domain.profile
    a, A, p2 = frame.slope, frame.A, frame.p2
    out = []
    for kappa in (1.0 / (1.0 + epsilon), 1.0 / (1.0 + epsilon) ** 2):
        log_rhs = np.logaddexp(kappa * frame.log_d - np.log(A), prof.log_phi(p2 * p2))
        if a > 0:
            log_rhs = np.logaddexp(log_rhs, np.log(a * w / A))
        if log_rhs >= prof.log_phi(frame.domain.r2**2):
            radius = np.inf
        else:
            radius = A * (np.sqrt(prof.log_inverse(log_rhs)) + p2) + a * np.sqrt(2.0) * w
        out.append((min(radius, w), radius >= w))
    (d1, c1), (d2, c2) = out
    return float(d1), float(d2), bool(c1), bool(c2)


@dataclass(frozen=True)
class ScaledRegion:
    """The region D_t^eps in normalized coordinates, as a predicate.

    Points z with z in W = (-w, w)^2 x B(0, w), rho(gamma^-1 z) < 0 and
    Re z1 > -d^(1/(1+eps)^2).
    """

    frame: NormalizationFrame
    epsilon: float
    w: float
    c0: float
    d1eps: float
    d2eps: float
    cap1: bool
    cap2: bool

    @property
    def log_depth(self) -> float:
        return self.frame.log_d / (1.0 + self.epsilon) ** 2

    def contains(self, z):
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        w = self.w
        in_w = (
            (np.abs(z[:, 0].real) < w)
            & (np.abs(z[:, 0].imag) < w)
            & (np.linalg.norm(z[:, 1:], axis=1) < w)
        )
        deep = z[:, 0].real > -np.exp(self.log_depth)
        return in_w & deep & (self.frame.rho_normalized(z) < 0)


def build_region(frame: NormalizationFrame, epsilon: float, delta0: float = DEFAULT_DELTA0):
    w = delta0 / 10.0
    d1, d2, c1, c2 = d1_d2_radii(frame, epsilon, w)
    return ScaledRegion(
        frame=frame,
        epsilon=float(epsilon),
        w=w,
        c0=float(np.cos(np.pi / (2 * (1 + epsilon)))),
        d1eps=d1,
        d2eps=d2,
        cap1=c1,
        cap2=c2,
    )


def cayley_sigma(frame: NormalizationFrame, z):
    """f(Sigma(z)) with Sigma(z) = (z1/d, z'/d*) and f(w) = ((1+w1)/(1-w1), w')."""
    z = np.asarray(z, dtype=complex)
    w1 = z[..., 0] / frame.d
    if np.any(w1 == 1.0):
        raise PoleError("z1 = d is the pole of the Cayley map")
    out = np.empty_like(z)
    out[..., 0] = (1 + w1) / (1 - w1)
    out[..., 1:] = z[..., 1:] / frame.dstar
    return out


def cayley_sigma_inverse(frame: NormalizationFrame, u):
    u = np.asarray(u, dtype=complex)
    if np.any(u[..., 0] == -1.0):
        raise PoleError("u1 = -1 has no preimage")
    out = np.empty_like(u)
    out[..., 0] = frame.d * (u[..., 0] - 1) / (u[..., 0] + 1)
    out[..., 1:] = frame.dstar * u[..., 1:]
    return out


def peak_function(epsilon: float, z1):
    """h(z1) = exp(-(-z1)^(1/(1+eps))) on the left half-plane (principal branch)."""
    z1 = np.asarray(z1, dtype=complex)
    if np.any(z1.real >= 0):
        raise BranchError("peak function is defined for Re z1 < 0")
    out = np.exp(-np.power(-z1, 1.0 / (1.0 + epsilon)))
    return out if out.ndim else complex(out)


@dataclass
class InclusionReport:
    t: float
    epsilon: float
    delta: float
    frac_inner: float
    frac_outer: float
    counterexamples: list = field(default_factory=list)
    cap_flags: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.frac_inner == 1.0 and self.frac_outer == 1.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _unit_disc(u1, u2):
    r = np.sqrt(u1)
    return r * np.exp(2j * np.pi * u2)


def _unit_ball(cols, radial):
    """Points of the unit ball in C^n from 2n normal-quantile columns and one radial column."""
    g = ndtri(np.clip(cols, 1e-12, 1 - 1e-12))
    n = g.shape[1] // 2
    v = g[:, :n] + 1j * g[:, n:]
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * (radial ** (1.0 / (2 * n)))[:, None]


def _sobol(dim, count, seed):
    m = int(np.ceil(np.log2(max(count, 2))))
    return qmc.Sobol(d=dim, scramble=True, seed=seed).random_base2(m)[:count]


def certify_inclusions(
    region: ScaledRegion,
    delta: float,
    sample_count: int = 10_000,
    seed: int = 0,
    max_counterexamples: int = 10,
) -> InclusionReport:
    """Sample-based check of the two inclusions sandwiching f(Sigma(D_t^eps)).

    (a) points of (1-delta)(disc x ball) pulled back by Sigma^-1 f^-1 lie in
    D_t^eps; (b) points of D_t^eps map into disc x B(0, d2eps/d*).
    Samples come from a scrambled Sobol sequence with the given seed.
    """
    if not 0.0 < delta < 1.0:
        raise DomainError("delta must lie in (0, 1)")
    frame = region.frame
    n = frame.domain.n
    nu = n + 1
    u = _sobol(2 + 2 * n + 1, sample_count, seed)
    pts = np.empty((sample_count, nu), dtype=complex)
    pts[:, 0] = (1 - delta) * _unit_disc(u[:, 0], u[:, 1])
    pts[:, 1:] = (1 - delta) * _unit_ball(u[:, 2 : 2 + 2 * n], u[:, -1])
    pre = cayley_sigma_inverse(frame, pts)
    ok_inner = region.contains(pre)

    # outer: sample D_t^eps directly; Re z1 log-uniform in (-depth, 0)
    v = _sobol(3 + 2 * n + 1, sample_count, seed + 1)
    log_lo = region.log_depth
    log_hi = min(frame.log_d - 30.0, log_lo - 1.0)
    x = -np.exp(log_hi + (log_lo - log_hi) * v[:, 0])
    y = region.w * (2 * v[:, 1] - 1)
    rmax = min(region.w, 1.5 * region.d2eps)
    zs = np.empty((sample_count, nu), dtype=complex)
    zs[:, 0] = x + 1j * y
    zs[:, 1:] = rmax * _unit_ball(v[:, 2 : 2 + 2 * n], v[:, -1])
    inside = region.contains(zs)
    # |f1| < 1 exactly when Re(z1/d) < 0; testing the sign avoids forming
    # |1 - z1/d|^2, which overflows once d is below ~1e-154
    fiber = zs[inside, 1:] / frame.dstar
    bound = region.d2eps / frame.dstar * (1 + 1e-12)
    ok_outer = (zs[inside, 0].real < 0) & (np.linalg.norm(fiber, axis=1) <= bound)

    counter = []
    for z in pts[~ok_inner][:max_counterexamples]:
        counter.append({"kind": "inner", "point": [[c.real, c.imag] for c in z]})
    for z in zs[inside][~ok_outer][:max_counterexamples]:
        counter.append({"kind": "outer", "point": [[c.real, c.imag] for c in z]})
    caps = [name for name, c in (("d1eps", region.cap1), ("d2eps", region.cap2)) if c]
    report = InclusionReport(
        t=frame.t,
        epsilon=region.epsilon,
        delta=float(delta),
        frac_inner=float(ok_inner.mean()),
        frac_outer=float(ok_outer.mean()) if ok_outer.size else 1.0,
        counterexamples=counter,
        cap_flags=caps,
    )
    if not report.passed:
        report.flags.append("outside asymptotic regime")
    if not ok_outer.size:
        report.flags.append("no outer samples accepted")
    return report
