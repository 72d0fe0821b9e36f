"""Numerical laboratory for invariant metrics near exponentially flat boundary points."""

from flatlab.profile import Profile, phi_eval, phi_derivative, phi_inverse, scaling_ratio
from flatlab.geometry import (
    UnitDisc,
    UnitBall,
    ProductDiscBall,
    HartogsFlat,
    ConeCurve,
)

__all__ = [
    "Profile",
    "phi_eval",
    "phi_derivative",
    "phi_inverse",
    "scaling_ratio",
    "UnitDisc",
    "UnitBall",
    "ProductDiscBall",
    "HartogsFlat",
    "ConeCurve",
]

__version__ = "0.1.0"
