"""Kobayashi metric closed forms and the squeeze bracket for the normalized ratio."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from flatlab.errors import CertificationError, DomainError, RegimeError
from flatlab.frames import InclusionReport, NormalizationFrame, ScaledRegion
from flatlab.logspace import log1mexp

__all__ = [
    "KobayashiBracket",
    "kobayashi_product",
    "localization_factor",
    "squeeze_bracket",
]


def kobayashi_product(xi, r1: float = 1.0, r2: float = 1.0) -> float:
    """Kobayashi metric of (r1 D) x B_n(0, r2) at the origin: max(|xi1|/r1, |xi'|/r2)."""
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    return float(max(abs(xi[0]) / r1, np.linalg.norm(xi[1:]) / r2))


def localization_factor(log_d: float, epsilon: float):
    """Explicit bound on the localization ratio of the scaled Kobayashi metrics.

    With k1 = 1/(1+eps), k2 = 1/(1+eps)^2 and c0 = cos(pi/(2(1+eps))), the
    Caratheodory distance from (-d, 0) to the complement of D_t^eps is at
    least L = (1/2) log((1 - exp(-c0 d^k2)) / d^k1), and the ratio is bounded
    by coth(L).

    Returns
    -------
    factor : float
        coth(L) >= 1.
    distance_bound : float
        L.

    Raises
    ------
    RegimeError
        If 1 - exp(-c0 d^k2) <= d^k1, where the bound says nothing.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    k1 = 1.0 / (1.0 + epsilon)
    k2 = k1 * k1
    c0 = np.cos(np.pi / (2 * (1 + epsilon)))
    log_num = log1mexp(-c0 * np.exp(k2 * log_d))
    L = 0.5 * (log_num - k1 * log_d)
    if not L > 0:
        raise RegimeError(
            f"1 - exp(-c0 d^k2) <= d^k1 at log d = {log_d}, eps = {epsilon}"
        )
    return float(1.0 / np.tanh(L)), float(L)


@dataclass(frozen=True)
class KobayashiBracket:
    """Bracket [lower, upper] for the Kobayashi metric of the normalized domain.

    ``center`` is max(|<U xi, e1>|/2d, |<U xi, e'>|/d*); the ratios are the
    endpoints divided by it.
    """

    lower: float
    upper: float
    center: float
    lower_ratio: float
    upper_ratio: float
    factors: dict = field(default_factory=dict)

    def contains_one(self) -> bool:
        return self.lower_ratio <= 1.0 <= self.upper_ratio


def squeeze_bracket(
    frame: NormalizationFrame,
    region: ScaledRegion,
    delta: float,
    xi,
    report: InclusionReport | None = None,
) -> KobayashiBracket:
    """Two-sided bound from the inclusions (1-delta)P in f Sigma(D) in D x B(d2/d*).

    The upper end uses the inner inclusion and the dilation law, giving the
    factor 1/(1-delta). The lower end uses the outer inclusion, giving d*/d2,
    and is divided by the localization factor that passes from D_t^eps to
    the whole normalized domain near the base point.
    """
    if report is None or not report.passed:
        raise CertificationError("inclusions not certified for this row")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    v = frame.U @ np.asarray(xi, dtype=complex)
    center = max(abs(v[0]) / (2 * frame.d), float(np.linalg.norm(v[1:])) / frame.dstar)
    if center == 0:
        raise DomainError("xi must be nonzero")
    loc, dist_bound = localization_factor(frame.log_d, region.epsilon)
    radius_ratio = frame.dstar / region.d2eps
    lower_ratio = radius_ratio / loc
    upper_ratio = 1.0 / (1.0 - delta)
    return KobayashiBracket(
        lower=lower_ratio * center,
        upper=upper_ratio * center,
        center=center,
        lower_ratio=lower_ratio,
        upper_ratio=upper_ratio,
        factors={
            "delta_margin": upper_ratio,
            "radius_ratio": radius_ratio,
            "localization": loc,
            "caratheodory_bound": dist_bound,
        },
    )
