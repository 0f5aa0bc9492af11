"""
optomech_dns.py
Cavity steady state, optical-spring effective parameters, the density noise
spectrum of a trapped cylinder and the CSL excess temperatures.

Table of mode parameters:

    mode        inertia   coupling   damping (bare)   epsilon
    VIBRATION   m         chi        gamma_m          m gamma_m
    ROTATION    I         g_phi      D_phi / I        D_phi
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import constants as _codata

from .csl_diffusion import CylinderGeometry, DiffusionKind
from .environment import DampingSet, GasEnvironment, thermal_psd_term
from .exceptions import BistabilityError, DomainError
from .physcore import HBAR, K_B

logger = logging.getLogger(__name__)

RELAXATION = 0.5
STEADY_STATE_TOLERANCE = 1e-12
MAX_ITERATIONS = 1000


class ModeKind(str, Enum):
    VIBRATION = "vibration"
    ROTATION = "rotation"


class SpectrumConvention(str, Enum):
    ONE_SIDED = "one_sided"
    TWO_SIDED = "two_sided"


class PhotonNumberPolicy(str, Enum):
    """What |alpha|^2 stands for in the spectrum and the optical spring.

    INTRACAVITY uses the steady-state photon number n_cav. INPUT uses the
    input photon flux |alpha_in|^2 as written in the input-output relation.
    """

    INTRACAVITY = "intracavity"
    INPUT = "input"


PHOTON_NUMBER_POLICY = PhotonNumberPolicy.INTRACAVITY


def laser_angular_frequency(wavelength_m: float) -> float:
    if not wavelength_m > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength_m!r} m")
    return 2.0 * math.pi * _codata.c / wavelength_m


def input_photon_flux(power_W: float, wavelength_m: float) -> float:
    """|alpha_in|^2 in photons/s from P_in = hbar omega_c |alpha_in|^2."""
    if not power_W >= 0:
        raise DomainError(f"input power must be >= 0 W, got {power_W!r}")
    return power_W / (HBAR * laser_angular_frequency(wavelength_m))


@dataclass(frozen=True)
class CavityConfig:
    kappa: float
    delta0: float
    chi: float
    g_phi: float
    input_photon_flux: float
    omega_c: float

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise DomainError(f"kappa must be positive, got {self.kappa!r}")
        if not math.isfinite(self.delta0):
            raise DomainError(f"delta0 must be finite, got {self.delta0!r}")
        for name in ("chi", "g_phi", "input_photon_flux"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be >= 0, got {value!r}")
        if not (math.isfinite(self.omega_c) and self.omega_c > 0):
            raise DomainError(f"omega_c must be positive, got {self.omega_c!r}")

    @classmethod
    def from_laser(cls, kappa: float, delta0: float, chi: float, g_phi: float,
                   input_power_W: float, wavelength_m: float) -> "CavityConfig":
        return cls(kappa, delta0, chi, g_phi,
                   input_photon_flux(input_power_W, wavelength_m),
                   laser_angular_frequency(wavelength_m))

    def intracavity_photons(self, delta: float) -> float:
        return 2.0 * self.kappa * self.input_photon_flux / (self.kappa ** 2 + delta ** 2)


@dataclass(frozen=True)
class MechanicalMode:
    kind: ModeKind
    resonance: float
    inertia: float
    bare_damping: float
    coupling: float
    epsilon: float

    def __post_init__(self):
        object.__setattr__(self, "kind", ModeKind(self.kind))
        if not (math.isfinite(self.resonance) and self.resonance > 0):
            raise DomainError(f"mode resonance must be positive, got {self.resonance!r}")
        if not (math.isfinite(self.inertia) and self.inertia > 0):
            raise DomainError(f"mode inertia must be positive, got {self.inertia!r}")
        for name in ("bare_damping", "coupling", "epsilon"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be >= 0, got {value!r}")


def vibration_mode(geom: CylinderGeometry, damping: DampingSet, omega_m: float, chi: float,
                   axis: DiffusionKind = DiffusionKind.VIB_PERP) -> MechanicalMode:
    """Translational mode of the cylinder, perpendicular to or along its symmetry axis."""
    axis = DiffusionKind(axis)
    if axis is DiffusionKind.ROT:
        raise DomainError("use rotation_mode for the rotational degree of freedom")
    gamma = damping.gamma_vib_sym if axis is DiffusionKind.VIB_SYM else damping.gamma_vib
    return MechanicalMode(ModeKind.VIBRATION, omega_m, geom.mass, gamma, chi, geom.mass * gamma)


def rotation_mode(geom: CylinderGeometry, damping: DampingSet, omega_phi: float, g_phi: float) -> MechanicalMode:
    inertia = geom.moment_of_inertia
    return MechanicalMode(ModeKind.ROTATION, omega_phi, inertia, damping.d_phi / inertia, g_phi, damping.d_phi)


@dataclass(frozen=True)
class SteadyState:
    n_cav: float
    delta_eff: float
    mean_x: float
    mean_phi: float
    iterations: int = 0


@dataclass(frozen=True, eq=False)
class Spectrum:
    frequencies: np.ndarray
    values: np.ndarray
    kind: ModeKind
    convention: SpectrumConvention = SpectrumConvention.TWO_SIDED

    def __post_init__(self):
        if self.frequencies.shape != self.values.shape:
            raise DomainError("spectrum frequencies and values differ in length")

    def one_sided(self) -> "Spectrum":
        if self.convention is SpectrumConvention.ONE_SIDED:
            return self
        return Spectrum(self.frequencies, 2.0 * self.values, self.kind, SpectrumConvention.ONE_SIDED)


def _static_response(cavity: CavityConfig, vib: MechanicalMode, rot: Optional[MechanicalMode],
                     n_cav: float) -> Tuple[float, float]:
    mean_x = HBAR * cavity.chi * n_cav / (vib.inertia * vib.resonance ** 2)
    mean_phi = 0.0
    if rot is not None:
        mean_phi = HBAR * cavity.g_phi * n_cav / (rot.inertia * rot.resonance ** 2)
    return mean_x, mean_phi


def solve_steady_state(cavity: CavityConfig, vib: MechanicalMode,
                       rot: Optional[MechanicalMode] = None) -> SteadyState:
    """Self-consistent detuning Delta = Delta0 - g_phi <phi> - chi <x>.

    Damped fixed-point iteration on Delta. Raises BistabilityError when the
    map does not settle, which happens on the bistable branch of the cavity.
    """
    tol = STEADY_STATE_TOLERANCE * max(abs(cavity.delta0), cavity.kappa)
    delta = cavity.delta0
    previous = delta
    for iteration in range(1, MAX_ITERATIONS + 1):
        n_cav = cavity.intracavity_photons(delta)
        mean_x, mean_phi = _static_response(cavity, vib, rot, n_cav)
        target = cavity.delta0 - cavity.g_phi * mean_phi - cavity.chi * mean_x
        if not math.isfinite(target):
            break
        if abs(target - delta) <= tol:
            logger.debug("steady state converged after %d iterations: delta=%.15e n_cav=%.6e",
                         iteration, delta, n_cav)
            return SteadyState(n_cav, delta, mean_x, mean_phi, iteration)
        previous = delta
        delta = delta + RELAXATION * (target - delta)
    raise BistabilityError(
        f"detuning fixed point did not converge in {MAX_ITERATIONS} iterations; "
        "drive is likely in the bistable regime",
        (previous, delta),
    )


def photon_number(cavity: CavityConfig, ss: SteadyState,
                  policy: PhotonNumberPolicy = PHOTON_NUMBER_POLICY) -> float:
    if PhotonNumberPolicy(policy) is PhotonNumberPolicy.INPUT:
        return cavity.input_photon_flux
    return ss.n_cav


def effective_params(cavity: CavityConfig, mode: MechanicalMode, ss: SteadyState, omega,
                     policy: PhotonNumberPolicy = PHOTON_NUMBER_POLICY):
    """Optical-spring frequency squared and damping rate at angular frequency omega.

    Both depend on omega; for ROTATION the damping returned is D_phi,eff / I.
    Accepts scalar or array omega.
    """
    omega = np.asarray(omega, dtype=float)
    n = photon_number(cavity, ss, policy)
    kappa, delta = cavity.kappa, ss.delta_eff
    g2 = mode.coupling ** 2
    denom = (kappa ** 2 + (delta - omega) ** 2) * (kappa ** 2 + (delta + omega) ** 2)
    spring = 2.0 * HBAR * g2 * n * delta * (kappa ** 2 + delta ** 2 - omega ** 2) / (mode.inertia * denom)
    cooling = 4.0 * HBAR * g2 * n * kappa * delta / (mode.inertia * denom)
    omega_eff_sq = mode.resonance ** 2 - spring
    gamma_eff = mode.bare_damping + cooling
    if omega_eff_sq.ndim == 0:
        return float(omega_eff_sq), float(gamma_eff)
    return omega_eff_sq, gamma_eff


def frequency_grid(mode: MechanicalMode, span_linewidths: float = 20.0, points: int = 4001,
                   linewidth: Optional[float] = None, center: Optional[float] = None) -> np.ndarray:
    """Log-spaced positive frequencies within span_linewidths of the resonance.

    linewidth and center default to the bare damping and bare resonance.
    """
    width = mode.bare_damping if linewidth is None else linewidth
    middle = mode.resonance if center is None else center
    if not width > 0:
        raise DomainError("frequency grid needs a positive linewidth; the mode is undamped")
    if points < 2:
        raise DomainError("frequency grid needs at least two points")
    if not middle > 0:
        raise DomainError(f"frequency grid center must be positive, got {middle!r}")
    low = middle - span_linewidths * width
    if low <= 0:
        low = 1e-3 * middle
    return np.geomspace(low, middle + span_linewidths * width, int(points))


def dns(mode: MechanicalMode, cavity: CavityConfig, ss: SteadyState, env: GasEnvironment, eta: float,
        omegas, include_radiation_pressure: bool = True,
        policy: PhotonNumberPolicy = PHOTON_NUMBER_POLICY) -> Spectrum:
    """Two-sided density noise spectrum of x (m^2/Hz) or phi (rad^2/Hz)."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    if np.any(omegas == 0):
        raise DomainError("frequency grid contains omega = 0")
    if eta < 0:
        raise DomainError(f"diffusion constant must be >= 0, got {eta!r}")
    n = photon_number(cavity, ss, policy)
    kappa, delta = cavity.kappa, ss.delta_eff
    lorentz_cav = kappa ** 2 + (delta - omegas) ** 2
    omega_eff_sq, gamma_eff = effective_params(cavity, mode, ss, omegas, policy)
    optical = 2.0 * HBAR ** 2 * n * kappa * mode.coupling ** 2 if include_radiation_pressure else 0.0
    bath = thermal_psd_term(mode.epsilon, env.temperature, omegas) + HBAR ** 2 * eta
    numerator = optical + lorentz_cav * bath
    denominator = mode.inertia ** 2 * lorentz_cav * ((omega_eff_sq - omegas ** 2) ** 2 + gamma_eff ** 2 * omegas ** 2)
    return Spectrum(omegas, numerator / denominator, mode.kind)


def csl_temperature(eta: float, epsilon: float) -> float:
    """hbar^2 eta / (2 k_B epsilon)."""
    if eta < 0:
        raise DomainError(f"diffusion constant must be >= 0, got {eta!r}")
    if epsilon == 0:
        raise DomainError("CSL temperature is defined relative to gas damping, which is zero here (P = 0)")
    return HBAR ** 2 * eta / (2.0 * K_B * epsilon)


def delta_t_csl(mode: MechanicalMode, eta: float) -> float:
    return csl_temperature(eta, mode.epsilon)
