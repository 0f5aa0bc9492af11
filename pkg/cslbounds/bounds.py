"""
bounds.py
From diffusion constants to exclusion curves: lab temperature-accuracy bounds,
fixed-mass geometry scans and the LISA Pathfinder torque bound.

Every CSL quantity is linear in lambda, so everything is evaluated at
lambda = 1 s^-1 and rescaled; no root finding is involved.
"""

import csv
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
from dotenv import load_dotenv
from tqdm import tqdm

from .csl_diffusion import CslParams, CubeGeometry, CylinderGeometry, DiffusionKind, eta_cube, eta_cylinder
from .environment import DampingSet, GasEnvironment, gas_damping
from .exceptions import DomainError
from .optomech_dns import csl_temperature
from .physcore import HBAR

logger = logging.getLogger(__name__)

SILICA_DENSITY = 2200.0  # kg/m^3
LISA_TORQUE_FACTOR = 0.04
# Torque-to-force noise ratios over L^2 for gas damping: infinite volume and the LISA housing.
ALPHA_GAS_INFINITE = 0.226
ALPHA_GAS = LISA_TORQUE_FACTOR
LISA_MASS_DISTANCE = 0.376  # m, between the two test masses
UNIT_LAMBDA = 1.0


@dataclass(frozen=True)
class ReferencePoint:
    name: str
    lam: float
    r_c: float

    @property
    def csl(self) -> CslParams:
        return CslParams(self.lam, self.r_c)


GRW = ReferencePoint("GRW", 1e-16, 1e-7)
ADLER_LOW = ReferencePoint("Adler", 1e-8, 1e-7)
ADLER_HIGH = ReferencePoint("Adler", 1e-6, 1e-6)
REFERENCE_POINTS = (GRW, ADLER_LOW, ADLER_HIGH)


def worker_count(requested: Optional[int] = None) -> int:
    """Scan parallelism: explicit request, else CSLBOUNDS_THREADS (a .env file is honoured), else 1."""
    if requested is None:
        load_dotenv()
        raw = os.getenv("CSLBOUNDS_THREADS", "1")
        try:
            requested = int(raw)
        except ValueError:
            raise DomainError(f"CSLBOUNDS_THREADS must be an integer, got {raw!r}")
    if requested < 1:
        raise DomainError(f"thread count must be >= 1, got {requested!r}")
    return requested


def _parallel_map(func, items: Sequence, threads: Optional[int], progress: bool, desc: str) -> list:
    workers = min(worker_count(threads), max(1, len(items)))
    if workers == 1:
        iterator = map(func, items)
        return list(tqdm(iterator, total=len(items), desc=desc, disable=not progress))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(func, items), total=len(items), desc=desc, disable=not progress))


def _epsilon_for(damping: DampingSet, kind: DiffusionKind) -> float:
    if kind is DiffusionKind.VIB_PERP:
        return damping.epsilon_vib
    if kind is DiffusionKind.VIB_SYM:
        return damping.epsilon_vib_sym
    return damping.epsilon_rot


# ---------------------------------------------------------------------------
# Lab scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LabScenario:
    geometry: CylinderGeometry
    environment: GasEnvironment
    delta_t_accuracy: float = 0.1
    mode_kind: DiffusionKind = DiffusionKind.ROT

    def __post_init__(self):
        object.__setattr__(self, "mode_kind", DiffusionKind(self.mode_kind))
        if not (math.isfinite(self.delta_t_accuracy) and self.delta_t_accuracy > 0):
            raise DomainError(f"temperature accuracy must be positive, got {self.delta_t_accuracy!r}")


def csl_temperatures(geom: CylinderGeometry, env: GasEnvironment, csl: CslParams) -> Dict[DiffusionKind, float]:
    """Excess temperature of every cylinder mode for the given CSL parameters."""
    damping = gas_damping(geom, env)
    return {
        kind: csl_temperature(eta_cylinder(geom, kind, csl), _epsilon_for(damping, kind))
        for kind in DiffusionKind
    }


def lambda_max_temperature(scn: LabScenario, r_c: float) -> float:
    """Largest lambda compatible with Delta T_CSL <= delta T."""
    damping = gas_damping(scn.geometry, scn.environment)
    eta_unit = eta_cylinder(scn.geometry, scn.mode_kind, CslParams(UNIT_LAMBDA, r_c))
    delta_t = csl_temperature(eta_unit, _epsilon_for(damping, scn.mode_kind))
    if delta_t <= 0:
        raise DomainError(f"CSL heating vanishes at r_c={r_c!r}; no bound can be set")
    return scn.delta_t_accuracy / delta_t


@dataclass(frozen=True)
class GeometryScanRow:
    ratio: float
    radius: float
    length: float
    delta_t_vib_perp: float
    delta_t_vib_sym: float
    delta_t_rot: float


def scan_geometry(mass: float, ratio_grid: Iterable[float], env: GasEnvironment, csl: CslParams,
                  density: float = SILICA_DENSITY, threads: Optional[int] = None,
                  progress: bool = False) -> List[GeometryScanRow]:
    """Excess temperatures of a fixed-mass cylinder as its aspect ratio R/L varies."""
    ratios = [float(r) for r in ratio_grid]

    def row(ratio: float) -> GeometryScanRow:
        geom = CylinderGeometry.from_aspect_ratio(mass, ratio, density)
        temps = csl_temperatures(geom, env, csl)
        return GeometryScanRow(ratio, geom.radius, geom.length, temps[DiffusionKind.VIB_PERP],
                               temps[DiffusionKind.VIB_SYM], temps[DiffusionKind.ROT])

    logger.info("scanning %d aspect ratios at r_c=%.3e m", len(ratios), csl.r_c)
    return _parallel_map(row, ratios, threads, progress, "geometry scan")


# ---------------------------------------------------------------------------
# LISA Pathfinder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LisaScenario:
    cube: CubeGeometry
    force_dns: float = 3.15e-30  # N^2/Hz
    torque_factor: float = LISA_TORQUE_FACTOR
    torque_dns_override: Optional[float] = None  # N^2 m^2/Hz
    differential_factor: float = 0.5
    sided_factor: float = 2.0
    mass_distance: float = LISA_MASS_DISTANCE

    def __post_init__(self):
        if not (math.isfinite(self.force_dns) and self.force_dns > 0):
            raise DomainError(f"force DNS must be positive, got {self.force_dns!r}")
        if not (math.isfinite(self.torque_factor) and self.torque_factor >= 0):
            raise DomainError(f"torque factor must be >= 0, got {self.torque_factor!r}")
        for name in ("differential_factor", "sided_factor"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value!r}")
        if self.torque_dns_override is not None and not self.torque_dns_override > 0:
            raise DomainError(f"torque DNS override must be positive, got {self.torque_dns_override!r}")

    @classmethod
    def pathfinder(cls, **overrides) -> "LisaScenario":
        """The flight configuration: 4.6 cm gold-platinum cube of 1.928 kg."""
        return cls(CubeGeometry(0.046, 1.928), **overrides)


def lisa_torque_dns(scn: LisaScenario) -> float:
    """S_tau = torque_factor * S_F * L^2."""
    return scn.torque_factor * scn.force_dns * scn.cube.side ** 2


def effective_torque_dns(scn: LisaScenario) -> float:
    if scn.torque_dns_override is not None:
        return scn.torque_dns_override
    return lisa_torque_dns(scn)


def _csl_noise_factor(scn: LisaScenario) -> float:
    return scn.differential_factor * scn.sided_factor * HBAR ** 2


def lisa_lambda_bound(scn: LisaScenario, r_c: float) -> float:
    """Rotational bound: S_tau compared with the CSL torque noise of one test mass."""
    s_tau = effective_torque_dns(scn)
    if s_tau <= 0:
        raise DomainError("torque DNS is zero; set a positive torque_factor or override")
    eta_unit = eta_cube(scn.cube, DiffusionKind.ROT, CslParams(UNIT_LAMBDA, r_c))
    return s_tau / (_csl_noise_factor(scn) * eta_unit)


def lisa_vibrational_bound(scn: LisaScenario, r_c: float) -> float:
    """Translational bound: S_F compared with the CSL force noise."""
    eta_unit = eta_cube(scn.cube, DiffusionKind.VIB_PERP, CslParams(UNIT_LAMBDA, r_c))
    return scn.force_dns / (_csl_noise_factor(scn) * eta_unit)


def lisa_improvement_factor(scn: LisaScenario, r_c: float) -> float:
    """How much lower the rotational bound is than the translational one."""
    return lisa_vibrational_bound(scn, r_c) / lisa_lambda_bound(scn, r_c)


def alpha_csl(geom: CubeGeometry, r_c: float) -> float:
    """eta_R / (eta_V L^2); tends to 1/6 for r_c << L."""
    csl = CslParams(UNIT_LAMBDA, r_c)
    return eta_cube(geom, DiffusionKind.ROT, csl) / (eta_cube(geom, DiffusionKind.VIB_PERP, csl) * geom.side ** 2)


def rotational_advantage(alpha_noise: float, geom: CubeGeometry, r_c: float) -> float:
    """Gain of a torque measurement over a force measurement when the noise has ratio alpha_noise."""
    if not alpha_noise > 0:
        raise DomainError(f"alpha of the noise must be positive, got {alpha_noise!r}")
    return alpha_csl(geom, r_c) / alpha_noise


# ---------------------------------------------------------------------------
# Exclusion curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ExclusionCurve:
    r_c: np.ndarray
    lambda_max: np.ndarray
    scenario_id: str

    def __post_init__(self):
        r_c = np.asarray(self.r_c, dtype=float)
        lam = np.asarray(self.lambda_max, dtype=float)
        if r_c.ndim != 1 or r_c.shape != lam.shape or r_c.size == 0:
            raise DomainError("exclusion curve needs equal-length, non-empty r_c and lambda arrays")
        if np.any(np.diff(r_c) <= 0):
            raise DomainError("exclusion curve r_c values must be strictly increasing")
        if not np.all(np.isfinite(lam) & (lam > 0)):
            raise DomainError(f"exclusion curve {self.scenario_id!r} has non-positive or non-finite lambda")
        object.__setattr__(self, "r_c", r_c)
        object.__setattr__(self, "lambda_max", lam)

    @property
    def points(self) -> List[tuple]:
        return list(zip(self.r_c.tolist(), self.lambda_max.tolist()))

    def lambda_at(self, r_c: float) -> float:
        """Log-log interpolation inside the sampled range."""
        if not self.r_c[0] <= r_c <= self.r_c[-1]:
            raise DomainError(f"r_c={r_c!r} outside the curve range [{self.r_c[0]!r}, {self.r_c[-1]!r}]")
        return float(np.exp(np.interp(np.log(r_c), np.log(self.r_c), np.log(self.lambda_max))))

    def excludes(self, csl: CslParams) -> bool:
        return csl.lam > self.lambda_at(csl.r_c)


Scenario = Union[LabScenario, LisaScenario]


def _check_grid(r_c_grid) -> np.ndarray:
    grid = np.atleast_1d(np.asarray(r_c_grid, dtype=float))
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("r_c grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(grid) & (grid > 0)):
        raise DomainError("r_c grid values must be positive and finite")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("r_c grid must be strictly increasing")
    return grid


def exclusion_curve(scn: Scenario, r_c_grid, scenario_id: Optional[str] = None, vibrational: bool = False,
                    threads: Optional[int] = None, progress: bool = False) -> ExclusionCurve:
    """lambda_max over an r_c grid; for LISA, vibrational=True uses the force bound."""
    grid = _check_grid(r_c_grid)
    if isinstance(scn, LisaScenario):
        bound = lisa_vibrational_bound if vibrational else lisa_lambda_bound
        default_id = "lisa-vibration" if vibrational else "lisa-rotation"
    elif isinstance(scn, LabScenario):
        bound = lambda_max_temperature
        default_id = f"lab-{scn.mode_kind.value}"
    else:
        raise TypeError(f"unsupported scenario type {type(scn).__name__}")
    values = _parallel_map(lambda r: bound(scn, r), grid.tolist(), threads, progress, "exclusion curve")
    return ExclusionCurve(grid, np.array(values), scenario_id or default_id)


def log_grid(start: float, stop: float, points: int) -> np.ndarray:
    if not (0 < start < stop) or points < 1:
        raise DomainError(f"bad log grid [{start!r}, {stop!r}] with {points!r} points")
    return np.geomspace(start, stop, int(points))


def load_reference_bounds(path: Union[str, Path]) -> List[ExclusionCurve]:
    """Read user-supplied literature bounds from a CSV with columns label, r_c, lambda.

    Rows sharing a label form one curve; rows are sorted by r_c.
    """
    path = Path(path)
    groups: Dict[str, list] = {}
    try:
        f = open(path, newline="", encoding="utf-8")
    except OSError as e:
        raise DomainError(f"cannot read reference bounds {path}: {e.strerror or e}") from e
    with f:
        reader = csv.DictReader(f)
        missing = {"label", "r_c", "lambda"} - set(reader.fieldnames or ())
        if missing:
            raise DomainError(f"{path}: reference CSV lacks columns {sorted(missing)}")
        for line, record in enumerate(reader, start=2):
            try:
                point = (float(record["r_c"]), float(record["lambda"]))
            except (TypeError, ValueError):
                raise DomainError(f"{path}:{line}: r_c and lambda must be numbers")
            groups.setdefault(record["label"], []).append(point)
    curves = []
    for label, pts in groups.items():
        pts.sort()
        r_c, lam = zip(*pts)
        curves.append(ExclusionCurve(np.array(r_c), np.array(lam), label))
    return curves
