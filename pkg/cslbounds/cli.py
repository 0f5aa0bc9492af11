"""
cli.py
Command line front end: `cslbounds <subcommand> --config <scenario.json> ...`.

Each subcommand loads and validates the whole scenario first, computes, and
writes its table once at the end. Failures print a single line
`error: <exit code>: <ErrorClass>: <message>` on stderr.
"""

import argparse
import logging
import math
import sys
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from . import __version__
from .bounds import (
    ALPHA_GAS,
    ALPHA_GAS_INFINITE,
    REFERENCE_POINTS,
    ExclusionCurve,
    alpha_csl,
    csl_temperatures,
    effective_torque_dns,
    exclusion_curve,
    lisa_improvement_factor,
    lisa_lambda_bound,
    lisa_vibrational_bound,
    load_reference_bounds,
    log_grid,
    rotational_advantage,
    scan_geometry,
)
from .config_manager import Scenario, load_scenario
from .csl_diffusion import (
    CslParams,
    CubeGeometry,
    CylinderGeometry,
    DiffusionKind,
    eta,
    eta_numeric_oracle,
)
from .environment import gas_damping
from .exceptions import ConfigValidationError, ConvergenceError, CslBoundsError
from .optomech_dns import (
    dns,
    effective_params,
    frequency_grid,
    rotation_mode,
    solve_steady_state,
    vibration_mode,
)
from .output import OutputTable, write_table

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
ORACLE_TOLERANCE = 1e-3
ORACLE_RATIOS = (0.1, 0.3, 1.0, 3.0, 10.0)
ORACLE_SIZES = (0.1, 0.3, 1.0, 3.0, 10.0)
ORACLE_CUBE_SIZES = (0.1, 1.0, 10.0, 100.0)


def _status(args, message: str):
    if args.verbose:
        print(message, file=sys.stderr)


def _cylinder(scn: Scenario) -> CylinderGeometry:
    geom = scn.require("geometry")
    if not isinstance(geom, CylinderGeometry):
        raise ConfigValidationError("geometry.shape", "this subcommand needs a cylinder")
    return geom


def _kinds_for(geom) -> List[DiffusionKind]:
    if isinstance(geom, CubeGeometry):
        return [DiffusionKind.VIB_PERP, DiffusionKind.ROT]
    return list(DiffusionKind)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_eta(args, scn: Scenario) -> OutputTable:
    geom = scn.require("geometry")
    csl = scn.csl or CslParams(1.0, 1e-7)
    columns = ["kind", "r_c_m", "eta_closed_form"]
    if args.oracle:
        columns += ["eta_oracle", "relative_deviation"]
    table = OutputTable(columns)
    for kind in _kinds_for(geom):
        closed = eta(geom, kind, csl)
        row = [kind.value, csl.r_c, closed]
        if args.oracle:
            numeric = eta_numeric_oracle(geom, kind, csl, scn.quadrature)
            row += [numeric, abs(closed - numeric) / abs(numeric) if numeric else 0.0]
        table.add_row(*row)
    return table


def cmd_damping(args, scn: Scenario) -> OutputTable:
    damping = gas_damping(_cylinder(scn), scn.require("gas"))
    table = OutputTable(["quantity", "value", "unit"])
    table.add_row("gamma_vib", damping.gamma_vib, "1/s")
    table.add_row("gamma_vib_sym", damping.gamma_vib_sym, "1/s")
    table.add_row("d_phi", damping.d_phi, "N m s")
    table.add_row("epsilon_vib", damping.epsilon_vib, "kg/s")
    table.add_row("epsilon_vib_sym", damping.epsilon_vib_sym, "kg/s")
    table.add_row("epsilon_rot", damping.epsilon_rot, "N m s")
    return table


def cmd_dns(args, scn: Scenario) -> OutputTable:
    geom = _cylinder(scn)
    env = scn.require("gas")
    cavity = scn.require("cavity")
    mech = scn.require("mechanics", "cavity")
    csl = scn.csl or CslParams(1.0, 1e-7)
    damping = gas_damping(geom, env)
    kind = DiffusionKind(args.mode)
    vib = vibration_mode(geom, damping, mech.omega_m, cavity.chi,
                         DiffusionKind.VIB_PERP if kind is DiffusionKind.ROT else kind)
    rot = rotation_mode(geom, damping, mech.omega_phi, cavity.g_phi)
    ss = solve_steady_state(cavity, vib, rot)
    logger.info("steady state: n_cav=%.6e delta=%.6e rad/s", ss.n_cav, ss.delta_eff)
    mode = rot if kind is DiffusionKind.ROT else vib
    omega_eff_sq, linewidth = effective_params(cavity, mode, ss, mode.resonance, scn.photon_number)
    omegas = frequency_grid(mode, scn.scan.span_linewidths, scn.scan.omega_points,
                            linewidth=linewidth if linewidth > 0 else None,
                            center=math.sqrt(omega_eff_sq) if omega_eff_sq > 0 else None)
    spectrum = dns(mode, cavity, ss, env, eta(geom, kind, csl), omegas,
                   include_radiation_pressure=not args.no_radiation_pressure, policy=scn.photon_number)
    if args.one_sided:
        spectrum = spectrum.one_sided()
    unit = "rad2_per_Hz" if kind is DiffusionKind.ROT else "m2_per_Hz"
    table = OutputTable(["omega_rad_s", f"S_{spectrum.convention.value}_{unit}"])
    for w, s in zip(spectrum.frequencies.tolist(), spectrum.values.tolist()):
        table.add_row(w, s)
    return table


def cmd_temperature(args, scn: Scenario) -> OutputTable:
    geom = _cylinder(scn)
    env = scn.require("gas")
    csl = scn.csl or CslParams(1.0, 1e-7)
    temps = csl_temperatures(geom, env, csl)
    table = OutputTable(["kind", "lambda_per_s", "r_c_m", "delta_T_K"])
    for kind, value in temps.items():
        table.add_row(kind.value, csl.lam, csl.r_c, value)
    return table


def cmd_scan_geometry(args, scn: Scenario) -> OutputTable:
    geom = _cylinder(scn)
    env = scn.require("gas")
    lam = scn.csl.lam if scn.csl is not None else 1.0
    r_c_values = args.r_c or list(scn.scan.r_c_values)
    ratios = log_grid(scn.scan.ratio_min, scn.scan.ratio_max, scn.scan.ratio_points)
    table = OutputTable(["r_c_m", "R_over_L", "radius_m", "length_m",
                         "delta_T_vib_perp_K", "delta_T_vib_sym_K", "delta_T_rot_K"])
    for r_c in r_c_values:
        rows = scan_geometry(geom.mass, ratios, env, CslParams(lam, r_c), scn.density,
                             threads=args.threads, progress=not args.no_progress)
        for row in rows:
            table.add_row(r_c, row.ratio, row.radius, row.length,
                          row.delta_t_vib_perp, row.delta_t_vib_sym, row.delta_t_rot)
    return table


def _curve_table(curve: ExclusionCurve) -> OutputTable:
    table = OutputTable(["r_c_m", "lambda_max_per_s"])
    for r_c, lam in curve.points:
        table.add_row(r_c, lam)
    return table


def _r_c_grid(scn: Scenario) -> np.ndarray:
    return log_grid(scn.scan.r_c_min, scn.scan.r_c_max, scn.scan.r_c_points)


def _reference_report(args, curve: ExclusionCurve, reference: ExclusionCurve):
    inside = (curve.r_c >= reference.r_c[0]) & (curve.r_c <= reference.r_c[-1])
    if not inside.any():
        logger.warning("reference %r does not overlap the r_c range of %s",
                       reference.scenario_id, curve.scenario_id)
        return
    gain = np.array([reference.lambda_at(r) for r in curve.r_c[inside]]) / curve.lambda_max[inside]
    logger.info("%s vs %s: best gain %.3e, worst %.3e", curve.scenario_id, reference.scenario_id,
                gain.max(), gain.min())
    _status(args, f"📊 {curve.scenario_id} is tighter than {reference.scenario_id} at "
                  f"{int((gain > 1).sum())} of {int(inside.sum())} r_c values")


def cmd_exclusion(args, scn: Scenario) -> OutputTable:
    target = scn.lisa or scn.lab
    if target is None:
        raise ConfigValidationError("bound", "exclusion needs a 'bound' (lab) or 'lisa' section")
    references = [ref for path in args.reference or () for ref in load_reference_bounds(path)]
    curve = exclusion_curve(target, _r_c_grid(scn), scenario_id=scn.name,
                            threads=args.threads, progress=not args.no_progress)
    for point in REFERENCE_POINTS:
        if curve.r_c[0] <= point.r_c <= curve.r_c[-1]:
            verdict = "excluded" if curve.excludes(point.csl) else "not excluded"
            _status(args, f"📌 {point.name} point (lambda={point.lam:g}, r_c={point.r_c:g}) is {verdict} "
                          f"by {curve.scenario_id}")
    for reference in references:
        _reference_report(args, curve, reference)
    return _curve_table(curve)


def cmd_lisa(args, scn: Scenario) -> OutputTable:
    lisa = scn.require("lisa")
    s_tau = effective_torque_dns(lisa)
    logger.info("torque DNS S_tau = %.6e N^2 m^2/Hz", s_tau)
    table = OutputTable(["r_c_m", "S_tau_N2m2_per_Hz", "alpha_csl", "lambda_max_rot_per_s",
                         "lambda_max_vib_per_s", "vib_over_rot", "advantage_alpha_0_04", "advantage_alpha_0_226"])
    for r_c in _r_c_grid(scn).tolist():
        table.add_row(r_c, s_tau, alpha_csl(lisa.cube, r_c), lisa_lambda_bound(lisa, r_c),
                      lisa_vibrational_bound(lisa, r_c), lisa_improvement_factor(lisa, r_c),
                      rotational_advantage(ALPHA_GAS, lisa.cube, r_c),
                      rotational_advantage(ALPHA_GAS_INFINITE, lisa.cube, r_c))
    return table


def cmd_verify_oracle(args, scn: Scenario) -> OutputTable:
    r_c = 1e-6
    csl = CslParams(1.0, r_c)
    mass = 1e-15
    cases = []
    for ratio in ORACLE_RATIOS:
        for size in ORACLE_SIZES:
            length = size * r_c
            geom = CylinderGeometry(ratio * length, length, mass)
            cases += [("cylinder", ratio, size, geom, kind) for kind in DiffusionKind]
    for size in ORACLE_CUBE_SIZES:
        geom = CubeGeometry(size * r_c, mass)
        cases += [("cube", 1.0, size, geom, kind) for kind in (DiffusionKind.VIB_PERP, DiffusionKind.ROT)]

    table = OutputTable(["shape", "R_over_L", "L_over_r_c", "kind", "eta_closed_form", "eta_oracle",
                         "relative_deviation"])
    worst = 0.0
    for shape, ratio, size, geom, kind in tqdm(cases, desc="verify oracle", disable=args.no_progress):
        closed = eta(geom, kind, csl)
        numeric = eta_numeric_oracle(geom, kind, csl, scn.quadrature)
        rel = abs(closed - numeric) / abs(numeric)
        worst = max(worst, rel)
        table.add_row(shape, ratio, size, kind.value, closed, numeric, rel)
    logger.info("max relative deviation %.3e over %d cases", worst, len(cases))
    args.deferred_error = None
    if worst > ORACLE_TOLERANCE:
        args.deferred_error = ConvergenceError(
            f"closed forms deviate from the quadrature oracle by up to {worst:.3e} (> {ORACLE_TOLERANCE:g})")
    return table


COMMANDS: Dict[str, Callable] = {
    "eta": cmd_eta,
    "damping": cmd_damping,
    "dns": cmd_dns,
    "temperature": cmd_temperature,
    "scan-geometry": cmd_scan_geometry,
    "exclusion": cmd_exclusion,
    "lisa": cmd_lisa,
    "verify-oracle": cmd_verify_oracle,
}

HELP = {
    "eta": "CSL diffusion constants of the configured geometry",
    "damping": "residual-gas damping coefficients of the configured cylinder",
    "dns": "density noise spectrum of one mode",
    "temperature": "CSL excess temperatures of every cylinder mode",
    "scan-geometry": "excess temperatures of a fixed-mass cylinder against R/L",
    "exclusion": "lambda_max(r_c) exclusion curve of a lab or LISA scenario",
    "lisa": "LISA Pathfinder torque bound, force bound and their ratio",
    "verify-oracle": "closed forms against the k-space quadrature over the stress grid",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cslbounds",
        description="Bounds on the CSL collapse model from rotational and vibrational noise",
        epilog="Defaults: silica density 2200 kg/m^3, He-4 4.002602 amu, LISA torque factor 0.04, "
               "quadrature 64 nodes/axis with cutoff 8/r_c. CSLBOUNDS_THREADS caps scan threads.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override a scenario value (JSON literal); may be repeated")
    common.add_argument("--out", help="output file (default: scenario output.path, else stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default: csv)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging; repeat for debug")
    common.add_argument("--threads", type=int, help="worker threads for scans (overrides CSLBOUNDS_THREADS)")
    common.add_argument("--no-progress", action="store_true", help="hide progress bars")

    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=HELP[name], description=HELP[name])
        if name == "eta":
            p.add_argument("--oracle", action="store_true", help="also evaluate the quadrature oracle")
        elif name == "dns":
            p.add_argument("--mode", choices=[k.value for k in DiffusionKind], default=DiffusionKind.VIB_PERP.value)
            p.add_argument("--no-radiation-pressure", action="store_true",
                           help="drop the radiation-pressure term from the spectrum")
            p.add_argument("--one-sided", action="store_true", help="report the one-sided spectrum")
        elif name == "scan-geometry":
            p.add_argument("--r-c", type=float, action="append", metavar="METRES",
                           help="correlation length; may be repeated (default: scan.r_c_values)")
        elif name == "exclusion":
            p.add_argument("--reference", action="append", metavar="CSV",
                           help="literature bounds (columns label, r_c, lambda) to compare against; may be repeated")
    return parser


def configure_logging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def run(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    """Execute one subcommand and return its exit status."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    stdout = stdout if stdout is not None else sys.stdout
    args.deferred_error = None
    try:
        scn = load_scenario(args.config, args.overrides)
        _status(args, f"🔧 Loaded scenario '{scn.name}'")
        table = COMMANDS[args.command](args, scn)
        fmt = args.format or scn.output.format
        path = args.out or scn.output.path
        write_table(table, path, fmt, stream=stdout)
        if path is not None:
            _status(args, f"✅ Wrote {len(table.rows)} rows to {path}")
        if args.deferred_error is not None:
            raise args.deferred_error
    except CslBoundsError as e:
        print(f"error: {e.exit_code}: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
