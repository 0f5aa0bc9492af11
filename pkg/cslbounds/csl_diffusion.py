"""
csl_diffusion.py
CSL diffusion constants for rigid cylinders and cubes.

Closed forms for vibration (perpendicular to and along the symmetry axis) and
for rotation about the transverse x axis, plus an independent k-space
quadrature of the defining integrals used as an oracle.

Orientation convention: symmetry axis along z, vibration and rotation axis
along x. Cylinder formulas are written in the dimensionless variables
x = (L / 2 r_C)^2 and b = R^2 / 2 r_C^2; wherever the printed expressions are
differences of large terms, the small-x / small-b regions are evaluated from
exact rational series (see series.py).
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, List, Tuple, Union

import numpy as np
from scipy import special

from . import series
from .exceptions import DomainError, InternalPrecisionError, OracleConvergenceError, UnsupportedKindError
from .physcore import M0
from .specfun import bessel_i_scaled, erf

logger = logging.getLogger(__name__)

SQRT_PI = math.sqrt(math.pi)
SERIES_THRESHOLD = 1.0
ORACLE_TARGET = 1e-4
PANEL_ORDER = 32


class DiffusionKind(str, Enum):
    """Which diffusion constant: vibration along x, along the symmetry axis, or rotation about x."""

    VIB_PERP = "vib_perp"
    VIB_SYM = "vib_sym"
    ROT = "rot"


def _positive(name: str, value: float):
    if not (math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class CslParams:
    """Collapse rate lambda [1/s] and correlation length r_C [m]."""

    lam: float
    r_c: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise DomainError(f"lambda must be >= 0, got {self.lam!r}")
        _positive("r_c", self.r_c)

    def with_lambda(self, lam: float) -> "CslParams":
        return CslParams(lam, self.r_c)


@dataclass(frozen=True)
class CylinderGeometry:
    radius: float
    length: float
    mass: float

    def __post_init__(self):
        _positive("radius", self.radius)
        _positive("length", self.length)
        _positive("mass", self.mass)

    @classmethod
    def from_density(cls, radius: float, length: float, density: float) -> "CylinderGeometry":
        _positive("density", density)
        return cls(radius, length, density * math.pi * radius ** 2 * length)

    @classmethod
    def from_aspect_ratio(cls, mass: float, ratio: float, density: float) -> "CylinderGeometry":
        """Cylinder of given mass and R/L ratio, with m = rho pi R^2 L."""
        _positive("mass", mass)
        _positive("R/L ratio", ratio)
        _positive("density", density)
        length = (mass / (density * math.pi * ratio ** 2)) ** (1.0 / 3.0)
        return cls(ratio * length, length, mass)

    @property
    def moment_of_inertia(self) -> float:
        """Moment of inertia about the transverse x axis."""
        return self.mass * (self.radius ** 2 / 4.0 + self.length ** 2 / 12.0)


@dataclass(frozen=True)
class CubeGeometry:
    side: float
    mass: float

    def __post_init__(self):
        _positive("side", self.side)
        _positive("mass", self.mass)

    @property
    def moment_of_inertia(self) -> float:
        return self.mass * self.side ** 2 / 6.0


Geometry = Union[CylinderGeometry, CubeGeometry]


@dataclass(frozen=True)
class QuadratureConfig:
    """Resolution of the k-space oracle.

    nodes_per_axis is the minimum node count per 1-D axis; it grows with
    k_max * size so oscillating form factors stay resolved.
    """

    nodes_per_axis: int = 64
    k_cutoff_factor: float = 8.0
    fd_step_factor: float = 1e-3
    max_doublings: int = 3
    target: float = ORACLE_TARGET

    def __post_init__(self):
        if int(self.nodes_per_axis) != self.nodes_per_axis or self.nodes_per_axis < 32:
            raise DomainError(f"nodes_per_axis must be an integer >= 32, got {self.nodes_per_axis!r}")
        if not self.k_cutoff_factor >= 6:
            raise DomainError(f"k_cutoff_factor must be >= 6, got {self.k_cutoff_factor!r}")
        if not 0 < self.fd_step_factor <= 1e-3:
            raise DomainError(f"fd_step_factor must lie in (0, 1e-3], got {self.fd_step_factor!r}")
        if self.max_doublings < 1:
            raise DomainError("max_doublings must be >= 1")


def _finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise InternalPrecisionError(f"non-finite intermediate while evaluating {what}")
    return value


# ---------------------------------------------------------------------------
# Dimensionless brackets
# ---------------------------------------------------------------------------

def _exp_pieces(x: float) -> Tuple[float, float, float]:
    """(E, Q, S) = (e^-x, 1 - e^-x, sqrt(pi) a erf(a)) with a = sqrt(x)."""
    a = math.sqrt(x)
    return math.exp(-x), -math.expm1(-x), SQRT_PI * a * erf(a)


@lru_cache(maxsize=None)
def _series_f_over_x() -> List[float]:
    # f = sqrt(pi) a erf(a) - 1 + e^-x, which starts at x^1
    f = series.sqrt_pi_a_erf() - series.one_minus_exp_neg()
    return f.divide_by_power(1).floats()


@lru_cache(maxsize=None)
def _series_q_over_x() -> List[float]:
    return series.one_minus_exp_neg().divide_by_power(1).floats()


@lru_cache(maxsize=None)
def _series_i1e_over_b() -> List[float]:
    return series.scaled_bessel_i(1).divide_by_power(1).floats()


@lru_cache(maxsize=None)
def _series_sym_bessel_over_b() -> List[float]:
    g = 1 - series.scaled_bessel_i(0) - series.scaled_bessel_i(1)
    return g.divide_by_power(1).floats()


def f_over_x(x: float) -> float:
    """(sqrt(pi) a erf(a) - 1 + e^(-a^2)) / a^2 with x = a^2."""
    if x < SERIES_THRESHOLD:
        return series.evaluate(_series_f_over_x(), x)
    _, q, s = _exp_pieces(x)
    return (s - q) / x


def q_over_x(x: float) -> float:
    """(1 - e^-x) / x."""
    if x < SERIES_THRESHOLD:
        return series.evaluate(_series_q_over_x(), x)
    return -math.expm1(-x) / x


def i1e_over_b(b: float) -> float:
    """e^-b I_1(b) / b."""
    if b < SERIES_THRESHOLD:
        return series.evaluate(_series_i1e_over_b(), b)
    return bessel_i_scaled(1, b) / b


def sym_bessel_over_b(b: float) -> float:
    """(1 - e^-b (I_0(b) + I_1(b))) / b."""
    if b < SERIES_THRESHOLD:
        return series.evaluate(_series_sym_bessel_over_b(), b)
    return (1.0 - bessel_i_scaled(0, b) - bessel_i_scaled(1, b)) / b


# Rotational cylinder bracket: X(x, b) = sum_k F_k(x) G_k(b), divided by x b.

def _rot_x_series() -> Tuple[series.PowerSeries, ...]:
    t = series.PowerSeries.variable()
    e, q, s = series.exp_neg(), series.one_minus_exp_neg(), series.sqrt_pi_a_erf()
    f1 = 8 * q - 4 * s
    f2 = q
    f3 = 4 * t * (3 - e) + 28 * q - s * (24 + 4 * t)
    return f1, f2, f3


def _rot_b_series() -> Tuple[series.PowerSeries, ...]:
    t = series.PowerSeries.variable()
    i0, i1 = series.scaled_bessel_i(0), series.scaled_bessel_i(1)
    g1 = 1 - i0
    g2 = 2 * t * (1 - 2 * i0 - 2 * i1)
    g3 = Fraction(-1, 3) * i1
    return g1, g2, g3


@lru_cache(maxsize=None)
def _rot_tables():
    fs, gs = _rot_x_series(), _rot_b_series()
    both = series.bivariate(list(zip(fs, gs)))
    # X vanishes on both axes, so X / (x b) is the table shifted by one in each index
    shifted = [[float(c) for c in row[1:]] for row in both[1:]]
    f_rows = [f.floats() for f in fs]
    g_rows = [g.floats() for g in gs]
    return shifted, f_rows, g_rows


def _rot_f_direct(x: float) -> Tuple[float, float, float]:
    e, q, s = _exp_pieces(x)
    return 8 * q - 4 * s, q, 4 * x * (3 - e) + 28 * q - s * (24 + 4 * x)


def _rot_g_direct(b: float) -> Tuple[float, float, float]:
    i0, i1 = bessel_i_scaled(0, b), bessel_i_scaled(1, b)
    return 1.0 - i0, 2 * b * (1.0 - 2 * i0 - 2 * i1), -i1 / 3.0


def rot_bracket_over_xb(x: float, b: float) -> float:
    """Curly bracket of the cylinder rotational formula divided by x b."""
    both, f_rows, g_rows = _rot_tables()
    small_x, small_b = x < SERIES_THRESHOLD, b < SERIES_THRESHOLD
    if small_x and small_b:
        return series.evaluate_bivariate(both, x, b)
    if small_x:
        g = _rot_g_direct(b)
        coeffs = [sum(f_rows[k][i + 1] * g[k] for k in range(3)) for i in range(series.TERMS - 1)]
        return series.evaluate(coeffs, x) / b
    if small_b:
        f = _rot_f_direct(x)
        coeffs = [sum(f[k] * g_rows[k][j + 1] for k in range(3)) for j in range(series.TERMS - 1)]
        return series.evaluate(coeffs, b) / x
    f, g = _rot_f_direct(x), _rot_g_direct(b)
    return sum(fk * gk for fk, gk in zip(f, g)) / (x * b)


# Cube rotational bracket: (Q - S) * C / x^3

@lru_cache(maxsize=None)
def _cube_rot_series() -> List[float]:
    t = series.PowerSeries.variable()
    e, q, s = series.exp_neg(), series.one_minus_exp_neg(), series.sqrt_pi_a_erf()
    curly = q * (8 * t * (3 - e) + 32 * q - 2 * s * (24 + 4 * t)) + 12 * s * s
    return ((q - s) * curly).divide_by_power(3).floats()


CUBE_SERIES_THRESHOLD = 2.0


def cube_rot_bracket(x: float) -> float:
    """(1 - e^-x - S) * {curly bracket} / x^3 for the cube rotational formula."""
    if x < CUBE_SERIES_THRESHOLD:
        return series.evaluate(_cube_rot_series(), x)
    e, q, s = _exp_pieces(x)
    curly = q * (8 * x * (3 - e) + 32 * q - 2 * s * (24 + 4 * x)) + 12 * s * s
    return (q - s) * curly / x ** 3


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def eta_point_particle(mass: float, csl: CslParams) -> float:
    """lambda m^2 / (2 m0^2 r_C^2), the limit of every vibrational form for size << r_C."""
    return csl.lam * mass ** 2 / (2.0 * M0 ** 2 * csl.r_c ** 2)


def eta_cylinder(geom: CylinderGeometry, kind: DiffusionKind, csl: CslParams) -> float:
    """Closed-form CSL diffusion constant of a homogeneous cylinder.

    VIB kinds are in m^-2 s^-1, ROT in s^-1 (rad^-2 s^-1).
    """
    kind = DiffusionKind(kind)
    if csl.lam == 0:
        return 0.0
    r_c = csl.r_c
    x = (geom.length / (2.0 * r_c)) ** 2
    b = geom.radius ** 2 / (2.0 * r_c ** 2)
    scale = csl.lam * geom.mass ** 2 / M0 ** 2
    if kind is DiffusionKind.VIB_PERP:
        value = scale / r_c ** 2 * i1e_over_b(b) * f_over_x(x)
    elif kind is DiffusionKind.VIB_SYM:
        value = scale / r_c ** 2 * q_over_x(x) * sym_bessel_over_b(b)
    else:
        value = scale / 4.0 * rot_bracket_over_xb(x, b)
    return _finite(value, f"cylinder eta ({kind.value})")


def eta_cube(geom: CubeGeometry, kind: DiffusionKind, csl: CslParams) -> float:
    """Closed-form CSL diffusion constant of a homogeneous cube."""
    kind = DiffusionKind(kind)
    if kind is DiffusionKind.VIB_SYM:
        raise UnsupportedKindError("a cube has no distinct symmetry axis; use VIB_PERP")
    if csl.lam == 0:
        return 0.0
    r_c = csl.r_c
    x = (geom.side / (2.0 * r_c)) ** 2
    scale = csl.lam * geom.mass ** 2 / M0 ** 2
    if kind is DiffusionKind.VIB_PERP:
        value = scale / (2.0 * r_c ** 2) * f_over_x(x) ** 2 * q_over_x(x)
    else:
        value = scale / 24.0 * cube_rot_bracket(x)
    return _finite(value, f"cube eta ({kind.value})")


def eta(geom: Geometry, kind: DiffusionKind, csl: CslParams) -> float:
    if isinstance(geom, CubeGeometry):
        return eta_cube(geom, kind, csl)
    return eta_cylinder(geom, kind, csl)


# ---------------------------------------------------------------------------
# Quadrature oracle
# ---------------------------------------------------------------------------

def _composite_gauss_legendre(n: int, upper: float) -> Tuple[np.ndarray, np.ndarray]:
    """n nodes on [0, upper] from equal panels of PANEL_ORDER-point Gauss-Legendre."""
    panels = max(1, n // PANEL_ORDER)
    t, w = np.polynomial.legendre.leggauss(PANEL_ORDER)
    width = upper / panels
    starts = np.arange(panels)[:, None] * width
    nodes = (starts + 0.5 * width * (t + 1.0)).ravel()
    weights = np.tile(0.5 * width * w, panels)
    return nodes, weights


def _node_count(cfg: QuadratureConfig, k_max: float, size: float) -> int:
    n = max(cfg.nodes_per_axis, int(math.ceil(2.0 * k_max * size)) + PANEL_ORDER)
    return PANEL_ORDER * int(math.ceil(n / PANEL_ORDER))


def _richardson_derivative(func: Callable[[np.ndarray], np.ndarray], u: np.ndarray, h: float) -> np.ndarray:
    d1 = (func(u + h) - func(u - h)) / (2.0 * h)
    d2 = (func(u + h / 2) - func(u - h / 2)) / h
    return (4.0 * d2 - d1) / 3.0


def _sinc(u: np.ndarray) -> np.ndarray:
    return np.sinc(u / np.pi)


class _DiscFormFactor:
    """Normalized form factor of a uniform disc, F(q) = (2/pi) int sqrt(1-u^2) cos(q u) du.

    Gauss-Chebyshev (second kind) nodes sized to the largest argument, built
    per oracle evaluation rather than cached on a fixed grid, so nothing is
    shared between threads. Odd node counts place one root at u = 0, which is
    weighted once.
    """

    CHUNK = 4_000_000

    def __init__(self, q_max: float):
        n = int(math.ceil(0.6 * q_max)) + 64
        u, w = special.roots_chebyu(n)
        # odd n puts a root at the centre, returned as a few ulp instead of 0
        u = np.where(np.abs(u) < 1e-12, 0.0, u)
        keep = u >= 0
        weights = np.where(u[keep] > 0, 2.0 * w[keep], w[keep])
        self.u = u[keep]
        self.w = weights * (2.0 / np.pi)

    def __call__(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        out = np.empty_like(q)
        step = max(1, self.CHUNK // self.u.size)
        for start in range(0, q.size, step):
            block = q[start:start + step]
            out[start:start + step] = np.cos(np.outer(block, self.u)) @ self.w
        return out


def _axial_integrals(length: float, r_c: float, k_max: float, n: int, h: float) -> Tuple[float, float, float, float]:
    """Full-line integrals of e^(-r^2 k^2) times s^2, s'^2, k s s', k^2 s^2 with s = sinc(k L / 2)."""
    k, w = _composite_gauss_legendre(n, k_max)
    u = 0.5 * length * k
    s = _sinc(u)
    sp = _richardson_derivative(_sinc, u, h)
    g = 2.0 * w * np.exp(-(r_c * k) ** 2)
    return (
        float(g @ (s * s)),
        float(g @ (sp * sp)),
        float(g @ (k * s * sp)),
        float(g @ (k * k * s * s)),
    )


def _radial_integrals(radius: float, r_c: float, k_max: float, n: int, h: float) -> Tuple[float, float, float, float]:
    """Half-line integrals over k_rho of e^(-r^2 k^2) times k F^2, k^3 F^2, k^2 F F', k F'^2."""
    k, w = _composite_gauss_legendre(n, k_max)
    q = radius * k
    form = _DiscFormFactor(q[-1] + 2 * h)
    f = form(q)
    fp = _richardson_derivative(form, q, h)
    g = w * np.exp(-(r_c * k) ** 2)
    return (
        float(g @ (k * f * f)),
        float(g @ (k ** 3 * f * f)),
        float(g @ (k * k * f * fp)),
        float(g @ (k * fp * fp)),
    )


def _cylinder_oracle(geom: CylinderGeometry, kind: DiffusionKind, csl: CslParams,
                     cfg: QuadratureConfig, scale: int) -> float:
    r_c = csl.r_c
    k_max = cfg.k_cutoff_factor / r_c
    h = cfg.fd_step_factor
    pref = csl.lam * r_c ** 3 * geom.mass ** 2 / (SQRT_PI * M0 ** 2)
    n_z = scale * _node_count(cfg, k_max, geom.length)
    n_r = scale * _node_count(cfg, k_max, geom.radius)
    z0, z1, z2, z3 = _axial_integrals(geom.length, r_c, k_max, n_z, h)
    a0, a1, a2, a3 = _radial_integrals(geom.radius, r_c, k_max, n_r, h)
    if kind is DiffusionKind.VIB_PERP:
        return pref * a1 * z0
    if kind is DiffusionKind.VIB_SYM:
        return 2.0 * pref * a0 * z3
    half = 0.5 * geom.length
    return pref * (half ** 2 * a1 * z1 - geom.length * geom.radius * a2 * z2 + geom.radius ** 2 * a3 * z3)


def _box_oracle(sides: Tuple[float, float, float], mass: float, kind: DiffusionKind, csl: CslParams,
                cfg: QuadratureConfig, scale: int, axis: int) -> float:
    r_c = csl.r_c
    k_max = cfg.k_cutoff_factor / r_c
    pref = csl.lam * r_c ** 3 * mass ** 2 / (math.pi ** 1.5 * M0 ** 2)
    z = [_axial_integrals(side, r_c, k_max, scale * _node_count(cfg, k_max, side), cfg.fd_step_factor)
         for side in sides]
    i, j, k = axis, (axis + 1) % 3, (axis + 2) % 3
    if kind is DiffusionKind.VIB_PERP:
        return pref * z[i][3] * z[j][0] * z[k][0]
    hj, hk = 0.5 * sides[j], 0.5 * sides[k]
    cross = hk ** 2 * z[j][3] * z[k][1] - 2.0 * hj * hk * z[j][2] * z[k][2] + hj ** 2 * z[j][1] * z[k][3]
    return pref * z[i][0] * cross


def eta_numeric_oracle(shape: Geometry, kind: DiffusionKind, csl: CslParams,
                       cfg: QuadratureConfig = QuadratureConfig(), axis: int = 0) -> float:
    """Diffusion constant from direct k-space quadrature of the defining integrals.

    The Gaussian-weighted integrand is separable (Cartesian for the cube,
    cylindrical with the azimuth done analytically for the cylinder), so the
    tensor-product Gauss-Legendre rule over the positive octant is summed as a
    product of 1-D rules. Form-factor derivatives use central differences with
    one Richardson step of fixed size fd_step_factor in the dimensionless
    argument (k L / 2 or k R), not a step relative to |k|. The node count is
    doubled until two successive results agree to cfg.target.
    """
    kind = DiffusionKind(kind)
    if isinstance(shape, CubeGeometry):
        if kind is DiffusionKind.VIB_SYM:
            raise UnsupportedKindError("a cube has no distinct symmetry axis; use VIB_PERP")
        if axis not in (0, 1, 2):
            raise DomainError(f"axis must be 0, 1 or 2, got {axis!r}")
        sides = (shape.side,) * 3
        evaluate = lambda scale: _box_oracle(sides, shape.mass, kind, csl, cfg, scale, axis)  # noqa: E731
    else:
        evaluate = lambda scale: _cylinder_oracle(shape, kind, csl, cfg, scale)  # noqa: E731
    if csl.lam == 0:
        return 0.0

    previous = evaluate(1)
    scale = 1
    for _ in range(cfg.max_doublings):
        scale *= 2
        current = evaluate(scale)
        rel = abs(current - previous) / max(abs(current), np.finfo(float).tiny)
        logger.debug("oracle %s %s: scale=%d value=%.12e rel_change=%.2e", type(shape).__name__, kind.value,
                     scale, current, rel)
        if rel <= cfg.target:
            return _finite(current, "quadrature oracle")
        previous = current
    if rel > 10 * cfg.target:
        raise OracleConvergenceError(
            f"quadrature did not converge for {type(shape).__name__} {kind.value}: "
            f"last two refinements differ by {rel:.3e}")
    logger.warning("oracle converged only to %.2e (target %.1e)", rel, cfg.target)
    return _finite(current, "quadrature oracle")
