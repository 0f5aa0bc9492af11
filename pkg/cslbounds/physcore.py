"""
physcore.py
Physical constants, the unit conversions the CLI needs, and thermal helpers.

Everything inside the package is SI. mbar, amu, micrograms and friends are
accepted only at the scenario-file boundary.
"""

import math
from dataclasses import dataclass

from scipy import constants as _codata

from .exceptions import DomainError

HBAR: float = _codata.hbar  # J s
K_B: float = _codata.k  # J/K
# CSL reference mass: one atomic mass unit (CODATA 2018), the usual convention for bounds.
AMU: float = 1.66053906660e-27  # kg
M0: float = AMU


@dataclass(frozen=True)
class Constants:
    """Bundle of the constants used throughout the package."""

    hbar: float = HBAR
    k_B: float = K_B
    m0: float = M0
    amu: float = AMU


CONSTANTS = Constants()


@dataclass(frozen=True)
class Temperature:
    """Absolute temperature in kelvin."""

    kelvin: float

    def __post_init__(self):
        if not (math.isfinite(self.kelvin) and self.kelvin > 0):
            raise DomainError(f"temperature must be a positive finite number of kelvin, got {self.kelvin!r}")

    def __float__(self) -> float:
        return float(self.kelvin)


def kelvin(value) -> Temperature:
    """Coerce a float or Temperature into a validated Temperature."""
    if isinstance(value, Temperature):
        return value
    return Temperature(float(value))


def pressure_mbar_to_pa(p: float) -> float:
    """Convert a pressure in mbar to Pa (1 mbar = 100 Pa)."""
    if not p >= 0:
        raise DomainError(f"pressure must be non-negative, got {p!r} mbar")
    return p * 100.0


def mass_from_amu(mass_amu: float) -> float:
    """Convert a particle mass in atomic mass units to kg."""
    if not mass_amu > 0:
        raise DomainError(f"particle mass must be positive, got {mass_amu!r} amu")
    return mass_amu * AMU


def inverse_thermal_beta(T) -> float:
    """Return beta = hbar / (2 k_B T) in seconds."""
    T = kelvin(T)
    return HBAR / (2.0 * K_B * T.kelvin)
