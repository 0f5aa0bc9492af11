"""
specfun.py
Overflow-free special functions needed by the closed-form diffusion constants.

All Bessel occurrences in the cylinder formulas come as e^(-x) I_n(x) with
x = R^2 / 2 r_C^2, which reaches ~1e12 for centimetre discs, so only the
exponentially scaled form is offered.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from .exceptions import DomainError, UnsupportedOrderError

ERF_SATURATION = 40.0

_SCALED_BESSEL = {0: special.i0e, 1: special.i1e}


@dataclass(frozen=True)
class ScaledBesselResult:
    """Value of e^(-x) I_n(x) together with its order and argument."""

    value: float
    order: int
    argument: float


def _check_order(n: int):
    if n not in _SCALED_BESSEL:
        raise UnsupportedOrderError(f"only orders 0 and 1 are supported, got {n!r}")


def bessel_i_scaled(n: int, x):
    """Return e^(-x) I_n(x) for n in {0, 1} and x >= 0.

    Accepts scalars or numpy arrays. Values stay in [0, 1] for every finite x.
    """
    _check_order(n)
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"scaled Bessel argument must be >= 0, got {x!r}")
    value = _SCALED_BESSEL[n](arr)
    if np.ndim(value) == 0:
        return float(value)
    return value


def bessel_i_scaled_result(n: int, x: float) -> ScaledBesselResult:
    """Scalar bessel_i_scaled wrapped with its provenance."""
    return ScaledBesselResult(value=bessel_i_scaled(n, x), order=n, argument=float(x))


def erf(x):
    """Error function, exactly +-1 beyond |x| = 40 and odd by construction."""
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("erf argument must not be NaN")
    mag = np.abs(arr)
    value = np.where(mag >= ERF_SATURATION, 1.0, special.erf(np.minimum(mag, ERF_SATURATION)))
    value = np.copysign(value, arr)
    if np.ndim(value) == 0:
        return float(value)
    return value
