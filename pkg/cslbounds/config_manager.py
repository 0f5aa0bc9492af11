"""
config_manager.py
Loads scenario files (JSON), applies command-line overrides and converts
everything to validated SI objects.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Tuple, Union

from .bounds import LISA_MASS_DISTANCE, LISA_TORQUE_FACTOR, SILICA_DENSITY, LabScenario, LisaScenario
from .csl_diffusion import CslParams, CubeGeometry, CylinderGeometry, DiffusionKind, QuadratureConfig
from .environment import HE4_MASS_AMU, GasEnvironment
from .exceptions import ConfigValidationError, CslBoundsError
from .optomech_dns import CavityConfig, PhotonNumberPolicy
from .physcore import mass_from_amu, pressure_mbar_to_pa

# Allowed keys per section. Keys starting with "_comment" are ignored anywhere.
SCHEMA: Dict[str, Tuple[str, ...]] = {
    "name": (),
    "csl": ("lambda", "r_c"),
    "geometry": ("shape", "radius", "length", "side", "mass", "density", "aspect_ratio"),
    "gas": ("species", "mass_amu", "temperature_K", "pressure_mbar"),
    "cavity": ("kappa", "delta0", "chi", "g_phi", "input_power_W", "wavelength_m",
               "omega_m", "omega_phi", "photon_number"),
    "bound": ("delta_t_K", "mode"),
    "lisa": ("force_dns", "torque_factor", "torque_dns_override", "differential_factor",
             "sided_factor", "mass_distance_m"),
    "scan": ("r_c_min", "r_c_max", "r_c_points", "r_c_values", "ratio_min", "ratio_max",
             "ratio_points", "span_linewidths", "omega_points"),
    "quadrature": ("nodes_per_axis", "k_cutoff_factor", "fd_step_factor", "max_doublings", "target"),
    "output": ("path", "format"),
}

GAS_SPECIES_AMU = {"He-4": HE4_MASS_AMU, "He4": HE4_MASS_AMU}


def _is_comment(key: str) -> bool:
    return key.startswith("_comment")


@dataclass(frozen=True)
class ScanSettings:
    r_c_min: float = 1e-9
    r_c_max: float = 1e-3
    r_c_points: int = 200
    r_c_values: Tuple[float, ...] = (1e-7, 1e-4)
    ratio_min: float = 1e-2
    ratio_max: float = 1e2
    ratio_points: int = 81
    span_linewidths: float = 20.0
    omega_points: int = 4001


@dataclass(frozen=True)
class OutputSettings:
    path: Optional[str] = None
    format: str = "csv"


@dataclass(frozen=True)
class MechanicsSettings:
    omega_m: float
    omega_phi: float


@dataclass
class Scenario:
    """A validated scenario file. Sections that were absent are None."""

    name: str
    csl: Optional[CslParams] = None
    geometry: Optional[Union[CylinderGeometry, CubeGeometry]] = None
    gas: Optional[GasEnvironment] = None
    cavity: Optional[CavityConfig] = None
    mechanics: Optional[MechanicsSettings] = None
    photon_number: PhotonNumberPolicy = PhotonNumberPolicy.INTRACAVITY
    lab: Optional[LabScenario] = None
    lisa: Optional[LisaScenario] = None
    scan: ScanSettings = field(default_factory=ScanSettings)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    output: OutputSettings = field(default_factory=OutputSettings)
    density: float = SILICA_DENSITY

    def require(self, attr: str, section: Optional[str] = None):
        value = getattr(self, attr)
        if value is None:
            raise ConfigValidationError(section or attr, "section is required for this subcommand")
        return value


def parse_override(text: str) -> Tuple[str, str, Any]:
    """Split 'section.key=value'; the value is read as a JSON literal, else kept as a string."""
    target, sep, raw = text.partition("=")
    section, dot, key = target.strip().partition(".")
    if not sep or not dot or not section or not key:
        raise ConfigValidationError(text, "override must look like section.key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return section, key, value


class ConfigManager:
    """Reads one scenario file and turns it into a Scenario."""

    def __init__(self, config_file: Union[str, Path, None] = None):
        self.config_file = Path(config_file) if config_file is not None else None
        self._config_cache: Optional[Dict[str, Any]] = None

    def load_config(self) -> Dict[str, Any]:
        """Parsed JSON document (an empty scenario when no file was given)."""
        if self._config_cache is not None:
            return self._config_cache
        if self.config_file is None:
            self._config_cache = {}
            return self._config_cache
        try:
            text = self.config_file.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigValidationError(str(self.config_file), f"cannot read scenario file: {e.strerror or e}")
        try:
            config = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigValidationError(str(self.config_file), f"invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
        if not isinstance(config, dict):
            raise ConfigValidationError(str(self.config_file), "top level must be a JSON object")
        self._config_cache = config
        return config

    def apply_overrides(self, overrides: Iterable[str]) -> Dict[str, Any]:
        config = self.load_config()
        for text in overrides:
            section, key, value = parse_override(text)
            block = config.setdefault(section, {})
            if not isinstance(block, dict):
                raise ConfigValidationError(section, "cannot override a key inside a non-object value")
            block[key] = value
        return config

    def validate_keys(self, config: Dict[str, Any]):
        for section, body in config.items():
            if _is_comment(section):
                continue
            if section not in SCHEMA:
                raise ConfigValidationError(section, "unknown section")
            if section == "name":
                continue
            if not isinstance(body, dict):
                raise ConfigValidationError(section, "section must be a JSON object")
            for key in body:
                if not _is_comment(key) and key not in SCHEMA[section]:
                    raise ConfigValidationError(f"{section}.{key}", "unknown key")

    def load_scenario(self, overrides: Iterable[str] = ()) -> Scenario:
        config = self.apply_overrides(overrides)
        self.validate_keys(config)
        default_name = self.config_file.stem if self.config_file is not None else "scenario"
        try:
            return _build(config, str(config.get("name", default_name)))
        except ConfigValidationError:
            raise
        except CslBoundsError as e:
            raise ConfigValidationError("scenario", str(e))


def load_scenario(path: Union[str, Path, None], overrides: Iterable[str] = ()) -> Scenario:
    return ConfigManager(path).load_scenario(overrides)


# ---------------------------------------------------------------------------
# Section builders
# ---------------------------------------------------------------------------

def _number(section: Dict[str, Any], key: str, where: str, default=None, required: bool = True) -> Optional[float]:
    if key not in section:
        if default is not None or not required:
            return default
        raise ConfigValidationError(f"{where}.{key}", "missing required key")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(f"{where}.{key}", f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigValidationError(f"{where}.{key}", "must be finite")
    return value


def _integer(section: Dict[str, Any], key: str, where: str, default: int) -> int:
    value = _number(section, key, where, default=float(default))
    if value != int(value):
        raise ConfigValidationError(f"{where}.{key}", f"expected an integer, got {value!r}")
    return int(value)


def _checked(key: str, build):
    """Run a constructor and report its domain errors against the given key."""
    try:
        return build()
    except ConfigValidationError:
        raise
    except CslBoundsError as e:
        raise ConfigValidationError(key, str(e))


def _build_geometry(section: Dict[str, Any], density: float):
    shape = section.get("shape", "cylinder")
    if shape == "cube":
        side = _number(section, "side", "geometry")
        mass = _number(section, "mass", "geometry", required=False)
        if mass is None:
            mass = density * side ** 3
        return _checked("geometry", lambda: CubeGeometry(side, mass))
    if shape != "cylinder":
        raise ConfigValidationError("geometry.shape", f"expected 'cylinder' or 'cube', got {shape!r}")
    mass = _number(section, "mass", "geometry", required=False)
    if "aspect_ratio" in section:
        if mass is None:
            raise ConfigValidationError("geometry.mass", "aspect_ratio needs a mass")
        ratio = _number(section, "aspect_ratio", "geometry")
        return _checked("geometry", lambda: CylinderGeometry.from_aspect_ratio(mass, ratio, density))
    radius = _number(section, "radius", "geometry")
    length = _number(section, "length", "geometry")
    if mass is None:
        return _checked("geometry", lambda: CylinderGeometry.from_density(radius, length, density))
    return _checked("geometry", lambda: CylinderGeometry(radius, length, mass))


def _build_gas(section: Dict[str, Any]) -> GasEnvironment:
    if "mass_amu" in section:
        amu = _number(section, "mass_amu", "gas")
    else:
        species = section.get("species", "He-4")
        if not isinstance(species, str) or species not in GAS_SPECIES_AMU:
            raise ConfigValidationError("gas.species", f"unknown species {species!r}; give mass_amu instead")
        amu = GAS_SPECIES_AMU[species]
    temperature = _number(section, "temperature_K", "gas")
    pressure_mbar = _number(section, "pressure_mbar", "gas")
    pressure = _checked("gas.pressure_mbar", lambda: pressure_mbar_to_pa(pressure_mbar))
    gas_mass = _checked("gas.mass_amu", lambda: mass_from_amu(amu))
    return _checked("gas.temperature_K", lambda: GasEnvironment(temperature, pressure, gas_mass))


def _build_cavity(section: Dict[str, Any]) -> Tuple[CavityConfig, MechanicsSettings, PhotonNumberPolicy]:
    values = {key: _number(section, key, "cavity") for key in
              ("kappa", "delta0", "chi", "g_phi", "input_power_W", "wavelength_m")}
    cavity = _checked("cavity", lambda: CavityConfig.from_laser(**values))
    omega_m = _number(section, "omega_m", "cavity")
    omega_phi = _number(section, "omega_phi", "cavity")
    for key, value in (("omega_m", omega_m), ("omega_phi", omega_phi)):
        if value <= 0:
            raise ConfigValidationError(f"cavity.{key}", "mechanical resonance must be positive")
    try:
        policy = PhotonNumberPolicy(section.get("photon_number", PhotonNumberPolicy.INTRACAVITY.value))
    except ValueError:
        raise ConfigValidationError("cavity.photon_number", "expected 'intracavity' or 'input'")
    return cavity, MechanicsSettings(omega_m, omega_phi), policy


def _build_scan(section: Dict[str, Any]) -> ScanSettings:
    defaults = ScanSettings()
    values = section.get("r_c_values", list(defaults.r_c_values))
    if not isinstance(values, list) or not values or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in values):
        raise ConfigValidationError("scan.r_c_values", "expected a non-empty list of positive numbers")
    scan = ScanSettings(
        r_c_min=_number(section, "r_c_min", "scan", defaults.r_c_min),
        r_c_max=_number(section, "r_c_max", "scan", defaults.r_c_max),
        r_c_points=_integer(section, "r_c_points", "scan", defaults.r_c_points),
        r_c_values=tuple(float(v) for v in values),
        ratio_min=_number(section, "ratio_min", "scan", defaults.ratio_min),
        ratio_max=_number(section, "ratio_max", "scan", defaults.ratio_max),
        ratio_points=_integer(section, "ratio_points", "scan", defaults.ratio_points),
        span_linewidths=_number(section, "span_linewidths", "scan", defaults.span_linewidths),
        omega_points=_integer(section, "omega_points", "scan", defaults.omega_points),
    )
    if not 0 < scan.r_c_min < scan.r_c_max:
        raise ConfigValidationError("scan.r_c_min", "need 0 < r_c_min < r_c_max")
    if not 0 < scan.ratio_min < scan.ratio_max:
        raise ConfigValidationError("scan.ratio_min", "need 0 < ratio_min < ratio_max")
    for key in ("r_c_points", "ratio_points"):
        if getattr(scan, key) < 1:
            raise ConfigValidationError(f"scan.{key}", "need at least one point")
    if scan.omega_points < 2 or scan.span_linewidths <= 0:
        raise ConfigValidationError("scan.omega_points", "need >= 2 points over a positive span")
    return scan


def _build(config: Dict[str, Any], name: str) -> Scenario:
    geometry_section = config.get("geometry")
    density = SILICA_DENSITY
    if geometry_section is not None:
        density = _number(geometry_section, "density", "geometry", SILICA_DENSITY)
        if density <= 0:
            raise ConfigValidationError("geometry.density", "must be positive")
    scenario = Scenario(name=name, density=density)

    if "csl" in config:
        section = config["csl"]
        lam = _number(section, "lambda", "csl", 1.0)
        r_c = _number(section, "r_c", "csl", 1e-7)
        scenario.csl = _checked("csl", lambda: CslParams(lam, r_c))
    if geometry_section is not None:
        scenario.geometry = _build_geometry(geometry_section, density)
    if "gas" in config:
        scenario.gas = _build_gas(config["gas"])
    if "cavity" in config:
        scenario.cavity, scenario.mechanics, scenario.photon_number = _build_cavity(config["cavity"])
    if "scan" in config:
        scenario.scan = _build_scan(config["scan"])
    if "quadrature" in config:
        section = config["quadrature"]
        defaults = QuadratureConfig()
        scenario.quadrature = _checked("quadrature", lambda: QuadratureConfig(
            nodes_per_axis=_integer(section, "nodes_per_axis", "quadrature", defaults.nodes_per_axis),
            k_cutoff_factor=_number(section, "k_cutoff_factor", "quadrature", defaults.k_cutoff_factor),
            fd_step_factor=_number(section, "fd_step_factor", "quadrature", defaults.fd_step_factor),
            max_doublings=_integer(section, "max_doublings", "quadrature", defaults.max_doublings),
            target=_number(section, "target", "quadrature", defaults.target),
        ))
    if "output" in config:
        section = config["output"]
        fmt = section.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigValidationError("output.format", f"expected 'csv' or 'json', got {fmt!r}")
        path = section.get("path")
        if path is not None and not isinstance(path, str):
            raise ConfigValidationError("output.path", "expected a string")
        scenario.output = OutputSettings(path, fmt)

    if "bound" in config:
        section = config["bound"]
        if not isinstance(scenario.geometry, CylinderGeometry):
            raise ConfigValidationError("bound", "temperature bounds need a cylinder geometry")
        if scenario.gas is None:
            raise ConfigValidationError("gas", "temperature bounds need a gas section")
        delta_t = _number(section, "delta_t_K", "bound", 0.1)
        try:
            kind = DiffusionKind(section.get("mode", DiffusionKind.ROT.value))
        except ValueError:
            raise ConfigValidationError("bound.mode", "expected one of vib_perp, vib_sym, rot")
        scenario.lab = _checked("bound.delta_t_K", lambda: LabScenario(scenario.geometry, scenario.gas, delta_t, kind))
    if "lisa" in config:
        section = config["lisa"]
        if not isinstance(scenario.geometry, CubeGeometry):
            raise ConfigValidationError("lisa", "the LISA scenario needs a cube geometry")
        override = _number(section, "torque_dns_override", "lisa", required=False)
        scenario.lisa = _checked("lisa", lambda: LisaScenario(
            scenario.geometry,
            force_dns=_number(section, "force_dns", "lisa", 3.15e-30),
            torque_factor=_number(section, "torque_factor", "lisa", LISA_TORQUE_FACTOR),
            torque_dns_override=override,
            differential_factor=_number(section, "differential_factor", "lisa", 0.5),
            sided_factor=_number(section, "sided_factor", "lisa", 2.0),
            mass_distance=_number(section, "mass_distance_m", "lisa", LISA_MASS_DISTANCE),
        ))
    return scenario
