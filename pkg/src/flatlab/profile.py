"""Exponentially flat profile functions.

The standard example is phi(x) = exp(-1/x^m) for x > 0 and 0 otherwise.
Everything that can underflow is also available in log form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from flatlab.errors import DomainError

__all__ = [
    "Profile",
    "phi_eval",
    "phi_derivative",
    "phi_inverse",
    "scaling_ratio",
    "log_scaling_ratio",
]


def _exp_inverse_poly(x, m, order):
    """Polynomial factor P_k with phi^(k)(x) = phi(x) * P_k(x) for phi = exp(u), u = -x^-m."""
    log_p, sign = _log_exp_inverse_poly(x, m, order)
    return sign * np.exp(log_p)


def _log_exp_inverse_poly(x, m, order):
    """log|P_k(x)| and its sign, for x > 0.

    P_k = u1^k (1 + ...) with u1 = m x^(-m-1); the bracket only involves
    r_j = u_j / u1^j, which are positive powers of x, so nothing overflows
    for tiny x.
    """
    x = np.asarray(x, dtype=float)
    r2 = -(m + 1) * x**m / m
    if order == 1:
        q = np.ones_like(x)
    elif order == 2:
        q = 1 + r2
    else:
        r3 = (m + 1) * (m + 2) * x ** (2 * m) / m**2
        if order == 3:
            q = 1 + 3 * r2 + r3
        else:
            r4 = -(m + 1) * (m + 2) * (m + 3) * x ** (3 * m) / m**3
            q = 1 + 6 * r2 + 3 * r2 * r2 + 4 * r3 + r4
    with np.errstate(divide="ignore"):
        log_p = order * (np.log(m) - (m + 1) * np.log(x)) + np.log(np.abs(q))
    return log_p, np.sign(q)


@dataclass(frozen=True)
class Profile:
    """An exponentially flat profile phi with flatness order m.

    Parameters
    ----------
    m : int
        Flatness order; for ``form="exp-inverse"`` this is the exponent in exp(-1/x^m).
    form : {"exp-inverse", "custom"}
    epsilon0 : float, optional
        Radius on which phi is increasing and strictly convex. Defaults to the
        exact convexity radius (m/(m+1))^(1/m) for the exp-inverse form.
    func, derivs : callables, optional
        Only for ``form="custom"``: phi and its first four derivatives.
    """

    m: int = 1
    form: str = "exp-inverse"
    epsilon0: float | None = None
    func: Callable[[float], float] | None = field(default=None, compare=False)
    derivs: Sequence[Callable[[float], float]] | None = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"flatness order must be a positive integer, got {self.m}")
        if self.form == "exp-inverse":
            if self.epsilon0 is None:
                object.__setattr__(self, "epsilon0", (self.m / (self.m + 1)) ** (1.0 / self.m))
        elif self.form == "custom":
            if self.func is None or self.derivs is None or len(self.derivs) < 4:
                raise DomainError("custom profiles need phi and four derivative callables")
            if self.epsilon0 is None:
                raise DomainError("custom profiles must declare epsilon0")
        else:
            raise DomainError(f"unknown profile form {self.form!r}")
        self._check_convexity()

    def _check_convexity(self, samples: int = 400):
        # sample on a log grid so the flat end is covered too
        xs = self.epsilon0 * np.logspace(-3, 0, samples, endpoint=False)
        if self.form == "exp-inverse":
            ok = np.all(_exp_inverse_poly(xs, self.m, 2) > 0)
        else:
            vals = np.array([self.derivs[1](x) for x in xs])
            tiny = np.array([self.func(x) for x in xs]) == 0.0
            ok = np.all((vals > 0) | tiny)
        if not ok:
            raise DomainError(f"phi'' is not positive on (0, {self.epsilon0})")

    # evaluation -----------------------------------------------------------

    def log_phi(self, x):
        """log phi(x); -inf for x <= 0."""
        x = np.asarray(x, dtype=float)
        if self.form == "exp-inverse":
            with np.errstate(divide="ignore", over="ignore"):
                out = np.where(x > 0, -np.abs(x) ** (-float(self.m)), -np.inf)
        else:
            with np.errstate(divide="ignore"):
                out = np.log(np.vectorize(self._custom_phi, otypes=[float])(x))
        return out if out.ndim else float(out)

    def _custom_phi(self, x):
        return float(self.func(x)) if x > 0 else 0.0

    def __call__(self, x):
        return phi_eval(self, x)

    def derivative(self, x, order: int = 1):
        return phi_derivative(self, x, order)

    def log_derivative(self, x, order: int = 1):
        """log of phi^(order)(x) and its sign, for x > 0 (exp-inverse form only)."""
        if self.form != "exp-inverse":
            val = self.derivs[order - 1](x)
            return (np.log(abs(val)) if val else -np.inf), float(np.sign(val))
        log_p, sign = _log_exp_inverse_poly(float(x), self.m, order)
        return float(self.log_phi(x) + log_p), float(sign)

    def inverse(self, y):
        return phi_inverse(self, y)

    def log_inverse(self, log_y: float) -> float:
        """phi^-1(exp(log_y)), usable when exp(log_y) underflows."""
        if self.form == "exp-inverse":
            if not log_y < 0:
                raise DomainError(f"log y must be negative, got {log_y}")
            return (-1.0 / log_y) ** (1.0 / self.m)
        hi = self.epsilon0
        if not log_y < self.log_phi(hi):
            raise DomainError("y outside (0, phi(epsilon0))")
        lo = hi
        while self.log_phi(lo) > log_y:
            lo /= 2
            if lo < 1e-300:
                raise DomainError("y below the resolvable range of the custom profile")
        return brentq(lambda x: self.log_phi(x) - log_y, lo, hi, xtol=1e-300, rtol=1e-15)

    @property
    def phi_epsilon0(self) -> float:
        return phi_eval(self, self.epsilon0)


def phi_eval(p: Profile, x):
    """phi(x), zero for x <= 0.

    >>> round(phi_eval(Profile(1), 1.0), 9)
    0.367879441
    """
    x = np.asarray(x, dtype=float)
    if p.form == "exp-inverse":
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(x > 0, np.exp(-np.abs(x) ** (-float(p.m))), 0.0)
    else:
        out = np.vectorize(p._custom_phi, otypes=[float])(x)
    return out if out.ndim else float(out)


def phi_derivative(p: Profile, x, order: int = 1):
    """Derivative of order 1..4 of phi, computed as phi(x) * P(x) in log space."""
    if order not in (1, 2, 3, 4):
        raise DomainError(f"derivative order must be in 1..4, got {order}")
    x = np.asarray(x, dtype=float)
    if p.form == "custom":
        f = p.derivs[order - 1]
        out = np.vectorize(lambda s: float(f(s)) if s > 0 else 0.0, otypes=[float])(x)
        return out if out.ndim else float(out)
    pos = x > 0
    xs = np.where(pos, x, 1.0)
    log_p, sign = _log_exp_inverse_poly(xs, p.m, order)
    with np.errstate(divide="ignore", over="ignore"):
        # x^-m = inf gives exp(-inf) = 0, the correctly rounded result
        logabs = -(xs ** (-float(p.m))) + log_p
        out = np.where(pos, sign * np.exp(logabs), 0.0)
    return out if out.ndim else float(out)


def phi_inverse(p: Profile, y):
    """Unique x with phi(x) = y.

    For the exp-inverse form phi is increasing on all of (0, inf), so any
    y in (0, 1) is accepted; custom profiles require y in (0, phi(epsilon0)).
    """
    y = float(y)
    if p.form == "exp-inverse":
        if not 0.0 < y < 1.0:
            raise DomainError(f"phi_inverse needs 0 < y < 1, got {y}")
        return (-1.0 / np.log(y)) ** (1.0 / p.m)
    if not 0.0 < y < p.phi_epsilon0:
        raise DomainError(f"phi_inverse needs 0 < y < phi(epsilon0), got {y}")
    return p.log_inverse(np.log(y))


def log_scaling_ratio(p: Profile, r: float, x: float) -> float:
    """log(phi(r x) / phi(r))."""
    if not (r > 0 and x > 0):
        raise DomainError("scaling ratio needs r > 0 and x > 0")
    return float(p.log_phi(r * x) - p.log_phi(r))


def scaling_ratio(p: Profile, r: float, x: float) -> float:
    """phi(r x) / phi(r); raises DomainError when phi(r) underflows."""
    if phi_eval(p, r) == 0.0:
        raise DomainError(f"phi({r}) underflows; use log_scaling_ratio")
    return float(np.exp(log_scaling_ratio(p, r, x)))
