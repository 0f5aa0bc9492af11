"""
environment.py
Residual-gas damping of a levitated cylinder and the thermal bath term of the DNS.
"""

import math
from dataclasses import dataclass

import numpy as np

from .csl_diffusion import CylinderGeometry
from .exceptions import DomainError
from .physcore import HBAR, K_B, AMU, Temperature, inverse_thermal_beta, kelvin

HE4_MASS_AMU = 4.002602
# Below this value of beta*omega the bath term is replaced by its high-temperature form.
HIGH_T_CROSSOVER = 1e-6


@dataclass(frozen=True)
class GasEnvironment:
    """Residual gas at temperature T [K], pressure P [Pa], particle mass m_gas [kg]."""

    temperature: float
    pressure: float
    gas_mass: float

    def __post_init__(self):
        object.__setattr__(self, "temperature", kelvin(self.temperature).kelvin)
        if not (math.isfinite(self.pressure) and self.pressure >= 0):
            raise DomainError(f"pressure must be >= 0 Pa, got {self.pressure!r}")
        if not (math.isfinite(self.gas_mass) and self.gas_mass > 0):
            raise DomainError(f"gas particle mass must be positive, got {self.gas_mass!r}")

    @classmethod
    def he4(cls, temperature: float, pressure: float) -> "GasEnvironment":
        return cls(temperature, pressure, HE4_MASS_AMU * AMU)


@dataclass(frozen=True)
class DampingSet:
    gamma_vib: float  # 1/s, motion perpendicular to the symmetry axis
    gamma_vib_sym: float  # 1/s, motion along the symmetry axis
    d_phi: float  # N m s, rotational drag coefficient
    epsilon_vib: float  # kg/s, m * gamma_vib
    epsilon_vib_sym: float  # kg/s, m * gamma_vib_sym
    epsilon_rot: float  # N m s, equal to d_phi


def gas_damping(geom: CylinderGeometry, env: GasEnvironment) -> DampingSet:
    """Gas damping rates of a cylinder in the free-molecular regime."""
    if not isinstance(geom, CylinderGeometry):
        raise TypeError("gas damping is modelled for cylinders only")
    P, m, R, L = env.pressure, geom.mass, geom.radius, geom.length
    kt = K_B * env.temperature
    ratio = L / R
    gamma = P / m * math.sqrt(2 * math.pi * env.gas_mass / kt) * R ** 2 * (1 + 1.5 * ratio * (1 + math.pi / 6))
    d_phi = P * math.sqrt(math.pi * env.gas_mass / (2 * kt)) * R ** 4 * (
        1 + math.pi / 4 + ratio + 0.5 * ratio ** 2 + 0.25 * ratio ** 3 * (1 + math.pi / 6))
    gamma_sym = P / m * math.sqrt(8 * math.pi * env.gas_mass / kt) * R ** 2 * (1 + math.pi / 4 + 0.5 * ratio)
    return DampingSet(
        gamma_vib=gamma,
        gamma_vib_sym=gamma_sym,
        d_phi=d_phi,
        epsilon_vib=m * gamma,
        epsilon_vib_sym=m * gamma_sym,
        epsilon_rot=d_phi,
    )


def thermal_psd_term(epsilon: float, T, omega):
    """hbar |omega| epsilon coth(beta |omega|), the bath numerator of the DNS.

    Falls back to hbar epsilon / beta = 2 k_B T epsilon where beta |omega| < 1e-6.
    Works elementwise on arrays of omega.
    """
    if epsilon < 0:
        raise DomainError(f"damping coefficient must be >= 0, got {epsilon!r}")
    w = np.abs(np.asarray(omega, dtype=float))
    if np.any(w == 0):
        raise DomainError("thermal term has a pole at omega = 0; use the high-temperature form for DC")
    beta = inverse_thermal_beta(T)
    bw = beta * w
    high_t = HBAR * epsilon / beta
    with np.errstate(over="ignore"):
        exact = HBAR * w * epsilon / np.tanh(np.where(bw < HIGH_T_CROSSOVER, 1.0, bw))
    value = np.where(bw < HIGH_T_CROSSOVER, high_t, exact)
    if np.ndim(value) == 0:
        return float(value)
    return value


def heated_temperature(T, delta_t: float) -> Temperature:
    """Bath temperature that reproduces an extra heating delta_t in the high-temperature limit."""
    return Temperature(kelvin(T).kelvin + delta_t)
