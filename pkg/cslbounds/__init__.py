"""
cslbounds package
Bounds on the CSL collapse model from the rotational and vibrational noise of
levitated cylinders and of the LISA Pathfinder test masses.
"""

__version__ = "1.0.0"

from .exceptions import (
    CslBoundsError,
    DomainError,
    UnsupportedOrderError,
    UnsupportedKindError,
    ConfigValidationError,
    ConvergenceError,
    OracleConvergenceError,
    BistabilityError,
    InternalPrecisionError,
    OutputError
)

from .physcore import (
    HBAR,
    K_B,
    M0,
    CONSTANTS,
    Temperature,
    kelvin,
    pressure_mbar_to_pa,
    mass_from_amu,
    inverse_thermal_beta
)

from .specfun import bessel_i_scaled, erf

from .csl_diffusion import (
    DiffusionKind,
    CslParams,
    CylinderGeometry,
    CubeGeometry,
    QuadratureConfig,
    eta,
    eta_cylinder,
    eta_cube,
    eta_point_particle,
    eta_numeric_oracle
)

from .environment import (
    GasEnvironment,
    DampingSet,
    gas_damping,
    thermal_psd_term,
    heated_temperature
)

from .optomech_dns import (
    ModeKind,
    SpectrumConvention,
    PhotonNumberPolicy,
    CavityConfig,
    MechanicalMode,
    SteadyState,
    Spectrum,
    vibration_mode,
    rotation_mode,
    solve_steady_state,
    effective_params,
    frequency_grid,
    dns,
    csl_temperature,
    delta_t_csl,
    input_photon_flux
)

from .bounds import (
    GRW,
    REFERENCE_POINTS,
    LabScenario,
    LisaScenario,
    ExclusionCurve,
    csl_temperatures,
    lambda_max_temperature,
    scan_geometry,
    lisa_torque_dns,
    lisa_lambda_bound,
    lisa_vibrational_bound,
    lisa_improvement_factor,
    exclusion_curve,
    alpha_csl,
    rotational_advantage,
    load_reference_bounds
)

from .config_manager import ConfigManager, Scenario, load_scenario
from .output import OutputTable, write_table

__all__ = [
    'CslBoundsError',
    'DomainError',
    'UnsupportedOrderError',
    'UnsupportedKindError',
    'ConfigValidationError',
    'ConvergenceError',
    'OracleConvergenceError',
    'BistabilityError',
    'InternalPrecisionError',
    'OutputError',
    'HBAR',
    'K_B',
    'M0',
    'CONSTANTS',
    'Temperature',
    'kelvin',
    'pressure_mbar_to_pa',
    'mass_from_amu',
    'inverse_thermal_beta',
    'bessel_i_scaled',
    'erf',
    'DiffusionKind',
    'CslParams',
    'CylinderGeometry',
    'CubeGeometry',
    'QuadratureConfig',
    'eta',
    'eta_cylinder',
    'eta_cube',
    'eta_point_particle',
    'eta_numeric_oracle',
    'GasEnvironment',
    'DampingSet',
    'gas_damping',
    'thermal_psd_term',
    'heated_temperature',
    'ModeKind',
    'SpectrumConvention',
    'PhotonNumberPolicy',
    'CavityConfig',
    'MechanicalMode',
    'SteadyState',
    'Spectrum',
    'vibration_mode',
    'rotation_mode',
    'solve_steady_state',
    'effective_params',
    'frequency_grid',
    'dns',
    'csl_temperature',
    'delta_t_csl',
    'input_photon_flux',
    'GRW',
    'REFERENCE_POINTS',
    'LabScenario',
    'LisaScenario',
    'ExclusionCurve',
    'csl_temperatures',
    'lambda_max_temperature',
    'scan_geometry',
    'lisa_torque_dns',
    'lisa_lambda_bound',
    'lisa_vibrational_bound',
    'lisa_improvement_factor',
    'exclusion_curve',
    'alpha_csl',
    'rotational_advantage',
    'load_reference_bounds',
    'ConfigManager',
    'Scenario',
    'load_scenario',
    'OutputTable',
    'write_table'
]
