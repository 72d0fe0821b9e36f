"""Small helpers for arithmetic on logarithms of tiny positive numbers."""

import numpy as np
from scipy.special import logsumexp

__all__ = ["log1mexp", "logsumexp", "logdiffexp", "LOG_TINY"]

# exp(x) underflows to a subnormal below this
LOG_TINY = -700.0


def log1mexp(x):
    """Return log(1 - exp(x)) for x < 0, accurate for x near 0 and for x very negative."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > -np.log(2.0), np.log(-np.expm1(x)), np.log1p(-np.exp(x)))
    return out if out.ndim else float(out)


def logdiffexp(a, b):
    """Return log(exp(a) - exp(b)) for a > b."""
    return a + log1mexp(b - a)
