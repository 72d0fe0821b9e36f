"""Numerical Bergman kernel of the truncated Hartogs flat model in C^2.

The domain D = {|z1| < R1, Re z1 + phi(|z2|^2) < 0, |z2| < R2} is invariant
under z2 -> e^{it} z2, so its Bergman space splits into modes z2^k f(z1) with
f in the weighted space A^2(D1, w_k) on the half disc D1 = {|z1| < R1, Re z1 < 0}.
The weight is the area of the fiber disc integrated against |z2|^{2k}:

    w_k(x) = pi r_max(x)^{2(k+1)} / (k+1),  r_max(x)^2 = min(R2^2, phi^-1(-x)).

Each mode kernel K_k is computed from a finite basis on D1 orthonormalized
in L^2(D1, w_k), and kappa(z) = sum_k K_k(z1) |z2|^{2k}.

Numerics, in normalized coordinates u = z1 / R1:

* basis: shifted monomials ((u - c)/s)^j for j <= dmax, plus rational edge
  functions 1/(u - p)^2 and 1/(u - p) with poles p on (0, 1] accumulating
  geometrically at the corner u = 0, and simple poles mirrored across the
  flat edge and the arc. The rational part captures the boundary singularity
  of the kernel that polynomials resolve only at very high degree;
* quadrature: polar Gauss-Legendre panels around the corner u = 0, graded
  geometrically toward r = 0 and toward the flat edge theta = +-pi/2, with
  an extra radial breakpoint on every angular node where the weight has its
  kink at Re z1 = -phi(R2^2);
* factorization: the weighted basis-evaluation matrix is reduced tile by
  tile to its R factor (a tall-skinny QR; the Gram matrix R^H R is never
  formed), columns are equilibrated and the SVD is truncated at a relative
  tolerance. Working with R instead of the Gram matrix keeps the full double
  precision range of singular values.

The basis resolves the sector |u| <= 0.8, Re u <= -0.1 or |Im u| <= |Re u|
around the inner normal, which contains every approach curve the harness
uses; elsewhere near the flat edge evaluations raise a ResolutionWarning.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import lapack, qr, solve_triangular

from flatlab.bergman import KernelModel
from flatlab.errors import (
    DomainError,
    IllConditioned,
    KindError,
    ResolutionWarning,
    TruncationWarning,
)
from flatlab.geometry import HartogsFlat
from flatlab.jets import KernelJets
from flatlab.profile import Profile

__all__ = [
    "EngineConfig",
    "FiberWeight",
    "ModeSpace",
    "HartogsKernel",
    "mode_weight",
    "mode_kernel",
    "build_kernel",
    "kernel_jets",
    "half_disc_kernel",
    "flat_fiber_kappa",
    "flat_fiber_jets",
]

# shifted-monomial center and scale in u = z1/R1
_CENTER = -0.45
_SCALE = 0.6
# mirror poles for the flat edge and the arc
_MIRROR_OFFSET = 0.25
_MIRROR_COUNT = 21
_ARC_COUNT = 16
# corner pole ladder p_j = exp(-_POLE_STEP j)
_POLE_STEP = 0.5
# resolved region in u: |u| <= radius and (Re u <= -edge or |Im u| <= |Re u|).
# Against the flat-fiber closed form the diagonal error there is below 2e-9;
# next to the flat edge away from the corner it reaches O(1)
_RESOLVED_RADIUS = 0.8
_RESOLVED_EDGE = 0.1


@dataclass(frozen=True)
class EngineConfig:
    """Knobs of the Hartogs kernel engine.

    quad_levels doubles the Gauss-Legendre order per level in both polar
    directions. extended_precision switches to the Gram route: tile Gram
    blocks summed in long double, then pivoted Cholesky. rational=False
    drops the edge functions and leaves the plain shifted monomials.
    """

    dmax: int = 20
    kmax: int = 2
    quad_levels: int = 0
    extended_precision: bool = False
    svd_tol: float = 1e-9
    cholesky_tol: float = 1e-13
    pole_min: float = 1e-10
    rational: bool = True
    gauss_order: int = 10
    workers: int = 1

    def __post_init__(self):
        if self.dmax < 0 or self.kmax < 2:
            raise DomainError("need dmax >= 0 and kmax >= 2")
        if self.quad_levels < 0:
            raise DomainError("quad_levels must be >= 0")

    @property
    def order(self) -> int:
        return self.gauss_order * 2**self.quad_levels


@dataclass(frozen=True)
class FiberWeight:
    """Fiber-disc weights w_k on the half disc; profile None means phi == 0."""

    profile: Profile | None
    r1: float = 1.0
    r2: float = 1.0

    @property
    def kink(self) -> float:
        """Re z1 below which r_max = R2 (-inf when phi == 0)."""
        if self.profile is None:
            return -math.inf
        return -float(self.profile(self.r2**2))

    def rmax2(self, x):
        """r_max(x)^2 for x = Re z1 < 0."""
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.r2**2)
        if self.profile is None:
            return out
        inner = (x > self.kink) & (x < 0)
        if np.any(inner):
            log_y = np.log(-x[inner])
            if self.profile.form == "exp-inverse":
                vals = (-1.0 / log_y) ** (1.0 / self.profile.m)
            else:
                vals = np.array([self.profile.log_inverse(v) for v in log_y])
            out[inner] = np.minimum(vals, self.r2**2)
        out[x >= 0] = 0.0
        return out

    def __call__(self, x, k: int):
        return math.pi * self.rmax2(x) ** (k + 1) / (k + 1)


def mode_weight(profile: Profile | None, box, k: int, x: float) -> float:
    """w_k(x) for the box (R1, R2); ``box`` is a HartogsFlat or an (r1, r2) pair."""
    if not x < 0:
        raise DomainError("mode weight needs Re z1 < 0")
    r1, r2 = (box.r1, box.r2) if isinstance(box, HartogsFlat) else box
    return float(FiberWeight(profile, r1, r2)(np.array([x]), k)[0])


@lru_cache(maxsize=None)
def _reference_rule(q):
    return leggauss(q)


def _gl(a, b, q):
    """Gauss-Legendre nodes and weights on each panel [a_i, b_i], flattened."""
    x, w = _reference_rule(q)
    a = np.atleast_1d(a)[:, None]
    b = np.atleast_1d(b)[:, None]
    return (0.5 * (b - a) * x + 0.5 * (a + b)).ravel(), (0.5 * (b - a) * w).ravel()


def _radial_breaks(rmin=1e-13, h=0.04):
    rb = [0.05]
    while rb[-1] > rmin:
        rb.append(rb[-1] / 2)
    rb.append(0.0)
    rb.extend(np.arange(0.05, 1.0, h))
    rb.append(1.0)
    return np.unique(np.array(rb))


def _angular_breaks(tmin=1e-10, h=0.08):
    half = math.pi / 2
    e = []
    u = half
    while u > tmin:
        e.append(u)
        u /= 2
    pts = [half - x for x in e] + [-(half - x) for x in e] + [half, -half]
    pts += list(np.arange(-half, half, h)[1:])
    return np.unique(np.array(pts))


def _tiles(kink_u: float, q: int):
    """Polar quadrature on the unit half disc, one tile per angular panel.

    Nodes u = -r e^{i theta} with theta in (-pi/2, pi/2), so Re u = -r cos theta.
    """
    rb = _radial_breaks()
    tb = _angular_breaks()
    for a, b in zip(tb[:-1], tb[1:]):
        th, wth = _gl(a, b, q)
        zs, ws = [], []
        for t, wt in zip(th, wth):
            breaks = rb
            if np.isfinite(kink_u):
                rc = -kink_u / math.cos(t)
                if 0 < rc < 1:
                    breaks = np.unique(np.append(rb, rc))
            r, wr = _gl(breaks[:-1], breaks[1:], q)
            zs.append(-r * np.exp(1j * t))
            ws.append(wr * r * wt)
        yield np.concatenate(zs), np.concatenate(ws)


def _poles(pole_min, rational=True):
    if not rational:
        return np.zeros(0), np.zeros(0, dtype=complex)
    n = int(math.ceil(math.log(1 / pole_min) / _POLE_STEP)) + 1
    corner = np.exp(-_POLE_STEP * np.arange(n))
    off = _MIRROR_OFFSET
    ys = np.linspace(-1, 1, _MIRROR_COUNT)
    ys2 = np.linspace(-1, 1, 2 * _MIRROR_COUNT - 1)
    th = np.linspace(math.pi / 2, 3 * math.pi / 2, _ARC_COUNT)
    mirror = np.concatenate([off + 1j * ys, off / 2.5 + 1j * ys2, (1 + off) * np.exp(1j * th)])
    return corner, mirror


def _basis(u, dmax, corner, mirror, order=0):
    """Basis values (order 0) or u-derivatives (order 1, 2); shape u.shape + (nbasis,)."""
    u = np.asarray(u, dtype=complex)[..., None]
    j = np.arange(dmax + 1)
    t = (u - _CENTER) / _SCALE
    if order == 0:
        P = t**j
    else:
        coef = np.ones(dmax + 1)
        for s in range(order):
            coef = coef * (j - s)
        P = coef * t ** np.maximum(j - order, 0) / _SCALE**order
    a = u - corner
    b = u - mirror
    off = _MIRROR_OFFSET
    if order == 0:
        R = [1 / a**2, 1 / a, off / b]
    elif order == 1:
        R = [-2 / a**3, -1 / a**2, -off / b**2]
    elif order == 2:
        R = [6 / a**4, 2 / a**3, 2 * off / b**3]
    else:
        raise DomainError("basis derivatives available up to order 2")
    return np.concatenate([P] + R, axis=-1)


@dataclass(frozen=True)
class ModeSpace:
    """Orthonormalized finite basis of A^2(D1, w_k) for one mode k.

    Values of the orthonormal functions at u are  diag(1/S) conj(Vh) (b(u)/dn),
    i.e. ``coef @ b(u)`` with coef = conj(Vh) / (S dn). The kernel is
    K_k(z1, w1) = sum_n e_n(z1) conj(e_n(w1)).
    """

    k: int
    r1: float
    dmax: int
    coef: np.ndarray = field(repr=False)
    singular_values: np.ndarray = field(repr=False)
    rank: int
    nbasis: int
    corner: np.ndarray = field(repr=False)
    mirror: np.ndarray = field(repr=False)
    method: str = "tsqr"

    @property
    def condition(self) -> float:
        """Condition number of the retained equilibrated factor."""
        s = self.singular_values
        return float(s[0] / s[self.rank - 1])

    def values(self, z1, order: int = 0):
        """Orthonormal functions (or their z1-derivatives) at z1; shape (..., rank)."""
        u = np.asarray(z1, dtype=complex) / self.r1
        b = _basis(u, self.dmax, self.corner, self.mirror, order)
        # d/dz1 = (1/R1) d/du, and the measure carries a factor R1^2
        return (b @ self.coef.T) / self.r1 ** (order + 1)

    def kernel(self, z1, w1):
        return complex(np.sum(self.values(z1) * np.conj(self.values(w1))))

    def diagonal(self, z1):
        e = self.values(z1)
        return np.sum(np.abs(e) ** 2, axis=-1)


def _factor_tsqr(tiles, nb, build_rows):
    Rm = None
    for z, w in tiles:
        A = build_rows(z, w)
        M = A if Rm is None else np.vstack([Rm, A])
        Rm = qr(M, mode="r", check_finite=False)[0][: M.shape[1]]
    return Rm


def _orthonormal_from_r(Rm, tol):
    dn = np.linalg.norm(Rm, axis=0)
    if np.any(dn == 0):
        raise IllConditioned("basis column vanishes on the quadrature")
    _, S, Vh = np.linalg.svd(Rm / dn)
    rank = int(np.sum(S > tol * S[0]))
    coef = np.conj(Vh[:rank]) / (S[:rank, None] * dn[None, :])
    return coef, S, rank


def _orthonormal_from_gram(G, tol):
    dn = np.sqrt(np.real(np.diag(G)))
    Ge = G / np.outer(dn, dn)
    c, piv, rank, info = lapack.zpstrf(Ge, tol=tol, lower=1)
    if info < 0:
        raise IllConditioned(f"zpstrf failed with info {info}")
    piv = piv - 1
    L = np.tril(c)[:rank, :rank]
    # e = L^-1 (P^T b / dn)[:rank]
    Linv = solve_triangular(L, np.eye(rank), lower=True)
    coef = np.zeros((rank, G.shape[0]), dtype=complex)
    coef[:, piv[:rank]] = Linv / dn[piv[:rank]][None, :]
    S = np.abs(np.diag(c))
    return coef, S, rank


def _build_modes(weight: FiberWeight, cfg: EngineConfig):
    """Factor all modes in one pass over the tiles (fixed order, so deterministic).

    With phi == 0 the weights w_k are constant multiples of w_0, so a single
    factor serves every mode after rescaling.
    """
    corner, mirror = _poles(cfg.pole_min, cfg.rational)
    nb = (cfg.dmax + 1) + 2 * corner.size + mirror.size
    kink_u = weight.kink / weight.r1
    ks = list(range(cfg.kmax + 1))
    flat = weight.profile is None
    groups = [0] if flat else ks
    tiles = list(_tiles(kink_u, cfg.order))
    method = "gram-pstrf" if cfg.extended_precision else "tsqr"

    acc = [None] * len(groups)
    if cfg.extended_precision:
        acc = [np.zeros((nb, nb), dtype=np.clongdouble) for _ in groups]

    def update(i, B, w, x):
        wk = weight(x, groups[i]) * w
        if cfg.extended_precision:
            acc[i] += (B.conj().T @ (wk[:, None] * B)).astype(np.clongdouble)
            return
        A = np.sqrt(wk)[:, None] * B
        M = A if acc[i] is None else np.vstack([acc[i], A])
        acc[i] = qr(M, mode="r", check_finite=False)[0][:nb]

    pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for z, w in tiles:
            B = _basis(z, cfg.dmax, corner, mirror)
            x = weight.r1 * z.real
            if pool is None:
                for i in range(len(groups)):
                    update(i, B, w, x)
            else:
                # groups touch disjoint accumulators, so the result does not
                # depend on scheduling
                list(pool.map(lambda i: update(i, B, w, x), range(len(groups))))
    finally:
        if pool is not None:
            pool.shutdown()

    factored = []
    for a in acc:
        if cfg.extended_precision:
            G = np.asarray(a, dtype=complex)
            G = 0.5 * (G + G.conj().T)
            factored.append(_orthonormal_from_gram(G.T, cfg.cholesky_tol))
        else:
            factored.append(_orthonormal_from_r(a, cfg.svd_tol))
    spaces = []
    for k in ks:
        if flat:
            coef, S, rank = factored[0]
            scale = math.sqrt(weight(np.array([-0.5]), 0)[0] / weight(np.array([-0.5]), k)[0])
            coef = coef * scale
        else:
            coef, S, rank = factored[k]
        spaces.append(ModeSpace(k, weight.r1, cfg.dmax, coef, S, rank, nb, corner, mirror, method))
    r0 = None if cfg.extended_precision else acc[0]
    return spaces, tiles, r0


def _falling(k, c):
    out = 1
    for s in range(c):
        out *= k - s
    return out


@dataclass
class HartogsKernel:
    """Mode spaces k = 0..kmax for one truncated Hartogs model.

    ``jets(z)`` returns the diagonal jet table of kappa up to bidegree (2, 2);
    ``model()`` wraps it as a KernelModel for the invariant computations.
    """

    weight: FiberWeight
    config: EngineConfig
    spaces: list
    domain: object = None
    diagnostics: dict = field(default_factory=dict)
    r_factor: np.ndarray | None = field(default=None, repr=False)

    @property
    def r1(self) -> float:
        return self.weight.r1

    def mode_diagonals(self, z1):
        return np.array([s.diagonal(z1) for s in self.spaces])

    def resolved(self, z1) -> bool:
        """True when z1 lies in the sector around the inner normal that the basis resolves."""
        u = complex(z1) / self.r1
        return abs(u) <= _RESOLVED_RADIUS and (
            u.real <= -_RESOLVED_EDGE or abs(u.imag) <= abs(u.real)
        )

    def _warn_resolution(self, z1):
        if not self.resolved(z1):
            warnings.warn(
                f"z1 = {z1} is outside the resolved sector of the basis"
                " (near the flat edge or the arc); expect large errors",
                ResolutionWarning,
                stacklevel=3,
            )

    def kappa(self, z) -> float:
        z = np.asarray(z, dtype=complex).reshape(-1)
        self._warn_resolution(z[0])
        Ks = self.mode_diagonals(z[0])
        return float(np.sum(Ks * abs(z[1]) ** (2 * np.arange(len(Ks)))))

    def _check_point(self, z):
        if z.shape[0] != 2:
            raise DomainError("the Hartogs engine is two-dimensional")
        if not (z[0].real < 0 and abs(z[0]) < self.r1):
            raise DomainError(f"z1 = {z[0]} outside the base half disc")
        if self.domain is not None and not self.domain.contains(z):
            raise DomainError(f"{z} outside the domain")
        if self.domain is None and abs(z[1]) >= self.weight.r2:
            raise DomainError(f"{z} outside the domain")

    def tail_estimate(self, z) -> float:
        """Relative size of the first omitted mode in the jets at z.

        The omitted mode K_{kmax+1} is extrapolated geometrically from the
        last two retained ones.
        """
        z = np.asarray(z, dtype=complex).reshape(-1)
        Ks = self.mode_diagonals(z[0])
        km = len(Ks) - 1
        k_next = Ks[km] ** 2 / Ks[km - 1]
        r = abs(z[1])
        worst = 0.0
        for c in range(3):
            for e in range(3):
                p = 2 * (km + 1) - c - e
                if p > 0 and r == 0:
                    continue
                num = _falling(km + 1, c) * _falling(km + 1, e) * k_next * r**p
                den = sum(
                    _falling(k, c) * _falling(k, e) * Ks[k] * r ** (2 * k - c - e)
                    for k in range(km + 1)
                    if k >= max(c, e) and (2 * k - c - e == 0 or r > 0)
                )
                if den > 0:
                    worst = max(worst, num / den)
        return float(worst)

    def jets(self, z) -> KernelJets:
        """Diagonal jets of kappa at z by termwise differentiation of the mode sum."""
        z = np.asarray(z, dtype=complex).reshape(-1)
        self._check_point(z)
        self._warn_resolution(z[0])
        tail = self.tail_estimate(z)
        if tail > 1e-9:
            warnings.warn(
                f"mode truncation at kmax = {self.config.kmax}: tail {tail:.2e}",
                TruncationWarning,
                stacklevel=2,
            )
        z1, z2 = z
        E = [[s.values(z1, o) for o in range(3)] for s in self.spaces]
        # P[a][b][k] = sum_n e_n^(a) conj(e_n^(b)) for mode k (ranks differ between modes)
        P = [
            [np.array([np.sum(Ek[a] * np.conj(Ek[b])) for Ek in E]) for b in range(3)]
            for a in range(3)
        ]
        ks = np.arange(len(self.spaces))

        def z2_factor(c, e):
            fc = np.array([_falling(k, c) for k in ks], dtype=float)
            fe = np.array([_falling(k, e) for k in ks], dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                pc = np.where(ks >= c, z2 ** np.maximum(ks - c, 0), 0)
                pe = np.where(ks >= e, np.conj(z2) ** np.maximum(ks - e, 0), 0)
            return fc * fe * pc * pe

        table = {}
        for a, b in [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)]:
            arr = np.zeros((2,) * (a + b), dtype=complex)
            for idx in itertools.product((0, 1), repeat=a + b):
                c = sum(idx[:a])
                e = sum(idx[a:])
                arr[idx] = np.sum(P[a - c][b - e] * z2_factor(c, e))
            table[(a, b)] = arr
        return KernelJets.from_holomorphic_half(
            2, table[(0, 0)], table[(1, 0)], table[(1, 1)], table[(2, 0)], table[(2, 1)], table[(2, 2)]
        )

    def model(self) -> KernelModel:
        return KernelModel(self.domain, self.jets, "hartogs-engine")

    def quadrature(self):
        """Yield (z1, area weights) panel by panel for the rule used in the build.

        Multiply by ``self.weight(z1.real, k)`` for the mode-k measure.
        """
        kink_u = self.weight.kink / self.r1
        for z, w in _tiles(kink_u, self.config.order):
            yield self.r1 * z, self.r1**2 * w

    def degree_delta(self, probes, drop: int = 4) -> float:
        """Largest relative change of K_0 at ``probes`` when the top ``drop`` monomial degrees are removed.

        Restricting the stored mode-0 factor to the surviving columns gives
        the smaller space exactly, so no new quadrature pass is needed.
        """
        if self.r_factor is None:
            raise IllConditioned("degree diagnostic needs the QR route")
        cfg = self.config
        s0 = self.spaces[0]
        keep = np.ones(self.r_factor.shape[1], dtype=bool)
        keep[max(cfg.dmax + 1 - drop, 1) : cfg.dmax + 1] = False
        sub, _, _ = _orthonormal_from_r(self.r_factor[:, keep], cfg.svd_tol)
        B = _basis(np.asarray(probes, dtype=complex) / self.r1, cfg.dmax, s0.corner, s0.mirror)
        kf = np.sum(np.abs(B @ s0.coef.T) ** 2, axis=-1)
        ks = np.sum(np.abs(B[:, keep] @ sub.T) ** 2, axis=-1)
        return float(np.max(np.abs(kf - ks) / kf))


# probe points for the degree-convergence diagnostic, in units of R1
_PROBES = np.array([-0.5, -0.3 + 0.4j, -0.1, -0.2 - 0.6j, -0.6 + 0.2j, -0.05])


def build_kernel(
    domain: HartogsFlat | None = None,
    config: EngineConfig | None = None,
    *,
    flat_fiber: bool = False,
    r1: float | None = None,
    r2: float | None = None,
) -> HartogsKernel:
    """Factor the mode spaces of a truncated Hartogs flat model.

    Parameters
    ----------
    domain : HartogsFlat, optional
        Must have n = 1. When omitted, ``flat_fiber`` must be set.
    flat_fiber : bool
        Force phi == 0, i.e. D = D1 x {|z2| < R2}; this is the oracle
        configuration with a closed-form kernel.
    """
    cfg = config or EngineConfig()
    if domain is not None:
        if not isinstance(domain, HartogsFlat):
            raise KindError("build_kernel expects a HartogsFlat domain")
        if domain.n != 1:
            raise DomainError("the Hartogs engine is restricted to one fiber variable")
        r1 = domain.r1 if r1 is None else r1
        r2 = domain.r2 if r2 is None else r2
        profile = None if flat_fiber else domain.profile
    else:
        if not flat_fiber:
            raise DomainError("pass a HartogsFlat domain or set flat_fiber")
        r1 = 1.0 if r1 is None else r1
        r2 = 1.0 if r2 is None else r2
        profile = None
    weight = FiberWeight(profile, float(r1), float(r2))
    spaces, tiles, r0 = _build_modes(weight, cfg)
    corner, mirror = spaces[0].corner, spaces[0].mirror
    diag = {
        "config": asdict(cfg),
        "r1": weight.r1,
        "r2": weight.r2,
        "flat_fiber": profile is None,
        "kink": weight.kink if np.isfinite(weight.kink) else None,
        "nbasis": spaces[0].nbasis,
        "quadrature_nodes": int(sum(z.size for z, _ in tiles)),
        "modes": [
            {"k": s.k, "rank": s.rank, "condition": s.condition, "method": s.method}
            for s in spaces
        ],
    }
    kern = HartogsKernel(weight, cfg, spaces, None if flat_fiber else domain, diag, r0)
    if r0 is not None:
        delta = kern.degree_delta(_PROBES * weight.r1, 4)
        diag["degree_delta"] = delta
        if delta > 1e-7:
            warnings.warn(
                f"K_0 changes by {delta:.2e} when the top four monomial degrees are dropped;"
                " dmax is too small",
                TruncationWarning,
                stacklevel=2,
            )
    return kern


def kernel_jets(domain: HartogsFlat, z, config: EngineConfig | None = None) -> KernelJets:
    """One-shot jets; prefer build_kernel when evaluating many points."""
    return build_kernel(domain, config).jets(z)


def _cayley_half_disc(z):
    """Conformal map of the left half disc onto the unit disc and its derivative."""
    s = (1 - 1j * z) / (1 + 1j * z)
    ds = -2j / (1 + 1j * z) ** 2
    s2 = s * s
    g = (s2 - 1j) / (s2 + 1j)
    dg = 4j * s * ds / (s2 + 1j) ** 2
    return g, dg


def half_disc_kernel(z, w=None, r1: float = 1.0):
    """Bergman kernel of {|z| < r1, Re z < 0} through the conformal map to the unit disc."""
    z = np.asarray(z, dtype=complex) / r1
    w = z if w is None else np.asarray(w, dtype=complex) / r1
    gz, dgz = _cayley_half_disc(z)
    gw, dgw = _cayley_half_disc(w)
    return dgz * np.conj(dgw) / (math.pi * (1 - gz * np.conj(gw)) ** 2) / r1**2


def flat_fiber_kappa(z, r1=1.0, r2=1.0) -> float:
    """Diagonal kernel of the product (half disc) x (disc of radius r2)."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    kz2 = r2**2 / (math.pi * (r2**2 - abs(z[1]) ** 2) ** 2)
    return float(np.real(half_disc_kernel(z[0], r1=r1)) * kz2)


def flat_fiber_jets(z, r1=1.0, r2=1.0, h: float | None = None) -> KernelJets:
    """Jets of the flat-fiber oracle kernel.

    The kernel is K(z, w) = k1(z1, w1) k2(z2, w2) with closed-form factors;
    its diagonal jets are derivatives of sesquiholomorphic functions, taken
    here by Cauchy integrals on circles of radius h in each variable (exact
    up to the trapezoidal rule, which converges geometrically). By default
    h is a quarter of the distance to the boundary, capped at 1e-3.
    """
    z = np.asarray(z, dtype=complex).reshape(-1)
    if h is None:
        # a quarter of the distance to the boundary keeps the trapezoidal error
        # near 4^-64
        gap = min(-z[0].real, r1 - abs(z[0]), r2 - abs(z[1]))
        if not gap > 0:
            raise DomainError(f"{z} outside the flat-fiber product")
        h = min(1e-3, 0.25 * gap)
    npts = 64
    th = 2 * math.pi * np.arange(npts) / npts
    circ = np.exp(1j * th)

    def k1(a, b):
        return half_disc_kernel(a, b, r1)

    def k2(a, b):
        return r2**2 / (math.pi * (r2**2 - a * np.conj(b)) ** 2)

    def sesqui_derivs(f, x):
        # D[a, b] = d^a/dx d^b/dxbar of f(x, y)|_{y=x}, a, b <= 2
        A = x + h * circ
        F = f(A[:, None], A[None, :])
        out = np.zeros((3, 3), dtype=complex)
        for a in range(3):
            for b in range(3):
                ca = math.factorial(a) / h**a * np.exp(-1j * a * th)
                cb = math.factorial(b) / h**b * np.exp(1j * b * th)
                out[a, b] = ca @ F @ cb / npts**2
        return out

    D1 = sesqui_derivs(k1, z[0])
    D2 = sesqui_derivs(k2, z[1])
    table = {}
    for a, b in [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1), (2, 2)]:
        arr = np.zeros((2,) * (a + b), dtype=complex)
        for idx in itertools.product((0, 1), repeat=a + b):
            c, e = sum(idx[:a]), sum(idx[a:])
            arr[idx] = D1[a - c, b - e] * D2[c, e]
        table[(a, b)] = arr
    return KernelJets.from_holomorphic_half(
        2, table[(0, 0)], table[(1, 0)], table[(1, 1)], table[(2, 0)], table[(2, 1)], table[(2, 2)]
    )


def mode_kernel(space: ModeSpace, z1, w1) -> complex:
    """K_k(z1, conj(w1)) for the mode space."""
    return space.kernel(z1, w1)
