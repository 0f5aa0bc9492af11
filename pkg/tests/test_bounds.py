import math

import numpy as np
import pytest

from cslbounds.bounds import (
    ALPHA_GAS,
    ALPHA_GAS_INFINITE,
    GRW,
    REFERENCE_POINTS,
    ExclusionCurve,
    LabScenario,
    LisaScenario,
    alpha_csl,
    csl_temperatures,
    exclusion_curve,
    lambda_max_temperature,
    lisa_improvement_factor,
    lisa_lambda_bound,
    lisa_torque_dns,
    lisa_vibrational_bound,
    load_reference_bounds,
    log_grid,
    rotational_advantage,
    scan_geometry,
    worker_count,
)
from cslbounds.csl_diffusion import CslParams, CubeGeometry, CylinderGeometry, DiffusionKind, eta_cube
from cslbounds.environment import GasEnvironment
from cslbounds.exceptions import DomainError

STRESS_GRID = np.geomspace(1e-9, 1e-3, 200)
TEN_MICROGRAMS = 1e-8


@pytest.fixture
def lisa():
    return LisaScenario.pathfinder()


@pytest.fixture
def coin_scenario(coin, cryo_helium):
    return LabScenario(coin, cryo_helium, 0.1, DiffusionKind.ROT)


def test_lisa_torque_conversion(lisa):
    assert lisa_torque_dns(lisa) == pytest.approx(2.66e-34, rel=1e-2)
    assert lisa_torque_dns(LisaScenario.pathfinder(torque_factor=0.0)) == 0.0
    doubled = LisaScenario.pathfinder(force_dns=2 * 3.15e-30)
    assert lisa_torque_dns(doubled) == pytest.approx(2 * lisa_torque_dns(lisa), rel=1e-15)


def test_alpha_csl_short_correlation_limit(lisa_cube):
    assert alpha_csl(lisa_cube, 1e-3 * lisa_cube.side) == pytest.approx(1 / 6, rel=1e-2)


def test_alpha_csl_independent_of_lambda(lisa_cube):
    csl = CslParams(7.0, 1e-5)
    rot = eta_cube(lisa_cube, DiffusionKind.ROT, csl)
    vib = eta_cube(lisa_cube, DiffusionKind.VIB_PERP, csl)
    assert rot / (vib * lisa_cube.side ** 2) == pytest.approx(alpha_csl(lisa_cube, 1e-5), rel=1e-12)
    assert rotational_advantage(ALPHA_GAS, lisa_cube, 1e-6) == pytest.approx(
        alpha_csl(lisa_cube, 1e-6) / 0.04, rel=1e-15)
    assert rotational_advantage(ALPHA_GAS_INFINITE, lisa_cube, 1e-6) == pytest.approx(
        alpha_csl(lisa_cube, 1e-6) / 0.226, rel=1e-15)


def test_alpha_csl_approaches_one_sixth_from_below(lisa_cube):
    r_c = lisa_cube.side * np.geomspace(0.1, 1e-4, 25)
    alphas = np.array([alpha_csl(lisa_cube, value) for value in r_c])
    assert np.all(np.diff(alphas) > 0)
    assert np.all(alphas < 1 / 6)
    assert alphas[-1] == pytest.approx(1 / 6, rel=2e-3)


def test_rotational_bound_is_about_four_times_better(lisa):
    ratio = lisa_improvement_factor(lisa, 1e-3 * lisa.cube.side)
    assert 4.0 <= ratio <= 4.3


def test_break_even_torque_sensitivity(lisa):
    scn = LisaScenario.pathfinder(torque_dns_override=1.07e-33)
    r_c = 1e-6
    assert lisa_lambda_bound(scn, r_c) == pytest.approx(lisa_vibrational_bound(scn, r_c), rel=0.05)


def test_differential_and_sided_factors_cancel(lisa):
    plain = LisaScenario.pathfinder(differential_factor=1.0, sided_factor=1.0)
    assert lisa_lambda_bound(plain, 1e-7) == pytest.approx(lisa_lambda_bound(lisa, 1e-7), rel=1e-15)


def test_lisa_rotation_below_vibration_for_short_correlation(lisa):
    rot = exclusion_curve(lisa, STRESS_GRID)
    vib = exclusion_curve(lisa, STRESS_GRID, vibrational=True)
    assert rot.scenario_id == "lisa-rotation"
    assert np.all(rot.lambda_max < vib.lambda_max)
    limit = STRESS_GRID <= 1e-3 * lisa.cube.side
    ratio = vib.lambda_max[limit] / rot.lambda_max[limit]
    assert np.all((ratio >= 4.0) & (ratio <= 4.3))


def test_lambda_max_is_linear_in_accuracy(coin, cryo_helium, coin_scenario):
    doubled = LabScenario(coin, cryo_helium, 0.2, DiffusionKind.ROT)
    assert lambda_max_temperature(doubled, 1e-7) == pytest.approx(2 * lambda_max_temperature(coin_scenario, 1e-7),
                                                                   rel=1e-15)


def test_lambda_max_defining_relation(coin, cryo_helium, coin_scenario):
    for r_c in (1e-8, 1e-7, 1e-6, 1e-5):
        lam = lambda_max_temperature(coin_scenario, r_c)
        delta_t = csl_temperatures(coin, cryo_helium, CslParams(lam, r_c))[DiffusionKind.ROT]
        assert delta_t == pytest.approx(0.1, rel=1e-12)


def test_coin_bound_far_below_unit_lambda(coin_scenario):
    lam = lambda_max_temperature(coin_scenario, 1e-7)
    assert 0 < lam < 1e-6
    assert lam == pytest.approx(7.975249070533080e-15, rel=1e-6)


def test_lambda_max_requires_gas(coin):
    scn = LabScenario(coin, GasEnvironment.he4(1.0, 0.0), 0.1)
    with pytest.raises(DomainError):
        lambda_max_temperature(scn, 1e-7)


def test_lab_scenario_validation(coin, cryo_helium):
    with pytest.raises(DomainError):
        LabScenario(coin, cryo_helium, 0.0)


def test_scan_rotation_dominates_flat_disc(cryo_helium):
    rows = scan_geometry(TEN_MICROGRAMS, [100.0], cryo_helium, CslParams(1.0, 1e-7))
    assert rows[0].delta_t_rot > rows[0].delta_t_vib_perp


def test_scan_perpendicular_vibration_dominates_at_long_correlation(cryo_helium):
    row, = scan_geometry(TEN_MICROGRAMS, [0.5], cryo_helium, CslParams(1.0, 1e-4))
    assert row.delta_t_vib_perp > row.delta_t_vib_sym
    assert row.delta_t_vib_perp > row.delta_t_rot


def test_scan_rotation_dip_at_comparable_dimensions(cryo_helium):
    ratios = np.geomspace(0.01, 100.0, 81)
    rows = scan_geometry(TEN_MICROGRAMS, ratios, cryo_helium, CslParams(1.0, 1e-4))
    rot = np.array([row.delta_t_rot for row in rows])
    k = int(np.argmin(rot))
    assert 0 < k < len(ratios) - 1
    assert 0.1 <= ratios[k] <= 10.0


def test_scan_threads_do_not_change_results(cryo_helium):
    ratios = np.geomspace(0.1, 10.0, 7)
    csl = CslParams(1.0, 1e-6)
    serial = scan_geometry(TEN_MICROGRAMS, ratios, cryo_helium, csl, threads=1)
    threaded = scan_geometry(TEN_MICROGRAMS, ratios, cryo_helium, csl, threads=3)
    assert serial == threaded


def test_worker_count_from_environment(monkeypatch):
    monkeypatch.setenv("CSLBOUNDS_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    monkeypatch.setenv("CSLBOUNDS_THREADS", "many")
    with pytest.raises(DomainError):
        worker_count()
    with pytest.raises(DomainError):
        worker_count(0)


def test_single_point_curve_matches_scalar(coin_scenario):
    curve = exclusion_curve(coin_scenario, [1e-7])
    assert curve.points == [(1e-7, lambda_max_temperature(coin_scenario, 1e-7))]


def test_reversed_grid_rejected(coin_scenario):
    with pytest.raises(DomainError):
        exclusion_curve(coin_scenario, [1e-6, 1e-7])


@pytest.mark.parametrize("radius, length", [(1e-4, 1e-7), (1e-2, 1e-5)])
def test_lab_curves_finite_over_stress_grid(radius, length, cryo_helium):
    geom = CylinderGeometry.from_density(radius, length, 2200.0)
    for kind in DiffusionKind:
        curve = exclusion_curve(LabScenario(geom, cryo_helium, 0.1, kind), STRESS_GRID)
        assert np.all(np.isfinite(curve.lambda_max) & (curve.lambda_max > 0))


def test_lisa_curve_continuous_through_cancellation_regime(lisa):
    curve = exclusion_curve(lisa, STRESS_GRID)
    assert np.all(np.isfinite(curve.lambda_max))
    jumps = np.abs(np.diff(np.log(curve.lambda_max)))
    assert jumps.max() < 1.0
    assert math.isfinite(curve.lambda_at(1e-7)) and math.isfinite(curve.lambda_at(1e-6))


def test_grw_point_classified_deterministically(lisa, coin_scenario):
    for scn in (lisa, coin_scenario):
        curve = exclusion_curve(scn, STRESS_GRID)
        assert curve.excludes(GRW.csl) is curve.excludes(GRW.csl)
        assert isinstance(curve.excludes(GRW.csl), bool)
    assert GRW in REFERENCE_POINTS


def test_curve_interpolation_hits_nodes():
    curve = ExclusionCurve(np.array([1e-8, 1e-7, 1e-6]), np.array([1e-10, 1e-12, 1e-9]), "toy")
    assert curve.lambda_at(1e-7) == pytest.approx(1e-12, rel=1e-12)
    assert curve.lambda_at(math.sqrt(1e-8 * 1e-7)) == pytest.approx(1e-11, rel=1e-12)
    assert curve.excludes(CslParams(1e-11, 1e-7))
    assert not curve.excludes(CslParams(1e-13, 1e-7))
    with pytest.raises(DomainError):
        curve.lambda_at(1e-3)


def test_curve_invariants():
    with pytest.raises(DomainError):
        ExclusionCurve(np.array([1e-7, 1e-8]), np.array([1.0, 1.0]), "bad")
    with pytest.raises(DomainError):
        ExclusionCurve(np.array([1e-8, 1e-7]), np.array([1.0, math.nan]), "bad")


def test_log_grid():
    grid = log_grid(1e-9, 1e-3, 7)
    assert grid[0] == pytest.approx(1e-9) and grid[-1] == pytest.approx(1e-3)
    with pytest.raises(DomainError):
        log_grid(1e-3, 1e-9, 7)


def test_load_reference_bounds(tmp_path):
    path = tmp_path / "bounds.csv"
    path.write_text("label,r_c,lambda\nX-ray,1e-6,1e-9\nX-ray,1e-7,1e-11\ncantilever,1e-7,1e-8\n", encoding="utf-8")
    curves = {curve.scenario_id: curve for curve in load_reference_bounds(path)}
    assert curves["X-ray"].points == [(1e-7, 1e-11), (1e-6, 1e-9)]
    assert curves["cantilever"].points == [(1e-7, 1e-8)]


def test_load_reference_bounds_requires_columns(tmp_path):
    path = tmp_path / "bounds.csv"
    path.write_text("name,r\nA,1\n", encoding="utf-8")
    with pytest.raises(DomainError):
        load_reference_bounds(path)


def test_missing_reference_file_is_a_domain_error(tmp_path):
    with pytest.raises(DomainError, match="cannot read reference bounds"):
        load_reference_bounds(tmp_path / "absent.csv")


def test_reference_points_inside_lisa_range(lisa):
    curve = exclusion_curve(lisa, log_grid(1e-9, 1e-3, 61))
    verdicts = {(point.lam, point.r_c): curve.excludes(point.csl) for point in REFERENCE_POINTS}
    assert len(verdicts) == 3
    assert verdicts[(1e-16, 1e-7)] is False
