import math

import numpy as np
import pytest
from scipy import constants
from scipy.integrate import trapezoid

from cslbounds import optomech_dns
from cslbounds.csl_diffusion import CslParams, CylinderGeometry, DiffusionKind, eta_cylinder
from cslbounds.environment import GasEnvironment, gas_damping
from cslbounds.exceptions import BistabilityError, DomainError
from cslbounds.optomech_dns import (
    CavityConfig,
    MechanicalMode,
    ModeKind,
    PhotonNumberPolicy,
    SpectrumConvention,
    SteadyState,
    delta_t_csl,
    dns,
    effective_params,
    frequency_grid,
    input_photon_flux,
    photon_number,
    rotation_mode,
    solve_steady_state,
    vibration_mode,
)
from cslbounds.physcore import HBAR, K_B

OMEGA_C = 1.77e15
MASS = 1e-12
OMEGA_M = 1e3


def _mode(coupling=0.0, damping=1.0, kind=ModeKind.VIBRATION, inertia=MASS, resonance=OMEGA_M):
    return MechanicalMode(kind, resonance, inertia, damping, coupling, inertia * damping)


def _cavity(chi=0.0, g_phi=0.0, flux=0.0, delta0=0.0, kappa=1e6):
    return CavityConfig(kappa, delta0, chi, g_phi, flux, OMEGA_C)


@pytest.fixture
def env():
    return GasEnvironment.he4(1.0, 1e-9)


def test_input_photon_flux():
    expected = 1.0 * 1.064e-6 / (constants.h * constants.c)
    assert input_photon_flux(1.0, 1.064e-6) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(5.3563e18, rel=1e-4)
    with pytest.raises(DomainError):
        input_photon_flux(-1.0, 1.064e-6)


def test_cavity_validation():
    with pytest.raises(DomainError):
        _cavity(kappa=0.0)
    with pytest.raises(DomainError):
        _cavity(chi=-1.0)


def test_decoupled_cavity_steady_state():
    cavity = _cavity(flux=1e12, delta0=3e5)
    ss = solve_steady_state(cavity, _mode(), _mode(kind=ModeKind.ROTATION))
    assert ss.delta_eff == cavity.delta0
    assert ss.n_cav == pytest.approx(2 * 1e6 * 1e12 / (1e12 + 9e10), rel=1e-15)
    assert ss.mean_x == 0.0 and ss.mean_phi == 0.0


def test_undriven_cavity_is_empty():
    ss = solve_steady_state(_cavity(chi=1e10, g_phi=1e6, delta0=2e5), _mode())
    assert ss.n_cav == 0.0
    assert ss.delta_eff == 2e5


def test_weak_coupling_matches_first_order_shift():
    chi, g_phi, flux = 1e10, 1e6, 5e14
    cavity = _cavity(chi=chi, g_phi=g_phi, flux=flux, delta0=1e4)
    vib = _mode()
    rot = _mode(kind=ModeKind.ROTATION, inertia=1e-20)
    ss = solve_steady_state(cavity, vib, rot)
    n0 = cavity.intracavity_photons(cavity.delta0)
    shift = chi * HBAR * chi * n0 / (MASS * OMEGA_M ** 2) + g_phi * HBAR * g_phi * n0 / (1e-20 * OMEGA_M ** 2)
    assert cavity.delta0 - ss.delta_eff == pytest.approx(shift, rel=1e-6)
    residual = ss.delta_eff - (cavity.delta0 - g_phi * ss.mean_phi - chi * ss.mean_x)
    assert abs(residual) <= 1e-12 * max(abs(cavity.delta0), cavity.kappa)


def test_non_converging_iteration_reports_last_iterates(monkeypatch):
    monkeypatch.setattr(optomech_dns, "MAX_ITERATIONS", 3)
    cavity = _cavity(chi=1e10, g_phi=1e6, flux=5e14, delta0=1e4)
    with pytest.raises(BistabilityError) as info:
        solve_steady_state(cavity, _mode(), _mode(kind=ModeKind.ROTATION, inertia=1e-20))
    assert len(info.value.last_iterates) == 2


def test_effective_params_without_coupling_or_detuning():
    mode = _mode(coupling=0.0, damping=2.0)
    ss = SteadyState(1e8, 5e5, 0.0, 0.0)
    assert effective_params(_cavity(), mode, ss, OMEGA_M) == (OMEGA_M ** 2, 2.0)
    resonant = SteadyState(1e8, 0.0, 0.0, 0.0)
    coupled = _mode(coupling=1e10, damping=2.0)
    omega_sq, gamma = effective_params(_cavity(chi=1e10), coupled, resonant, OMEGA_M)
    assert omega_sq == pytest.approx(OMEGA_M ** 2, rel=1e-15)
    assert gamma == pytest.approx(2.0, rel=1e-15)


def test_red_detuning_adds_optical_damping():
    kappa, delta, n, chi = 1e6, 5e5, 1e8, 1e10
    mode = _mode(coupling=chi, damping=2.0)
    ss = SteadyState(n, delta, 0.0, 0.0)
    omega_sq, gamma = effective_params(_cavity(chi=chi, kappa=kappa), mode, ss, OMEGA_M)
    w = OMEGA_M
    denom = (kappa ** 2 + (delta - w) ** 2) * (kappa ** 2 + (delta + w) ** 2)
    assert gamma == pytest.approx(2.0 + 4 * HBAR * chi ** 2 * n * kappa * delta / (MASS * denom), rel=1e-13)
    assert omega_sq == pytest.approx(
        w ** 2 - 2 * HBAR * chi ** 2 * n * delta * (kappa ** 2 + delta ** 2 - w ** 2) / (MASS * denom), rel=1e-13)
    assert gamma > 2.0


def test_input_policy_uses_input_flux():
    cavity = _cavity(flux=3e9)
    ss = SteadyState(1e3, 0.0, 0.0, 0.0)
    assert photon_number(cavity, ss) == 1e3
    assert photon_number(cavity, ss, PhotonNumberPolicy.INPUT) == 3e9


def test_equipartition(env):
    mode = _mode(damping=1.0)
    cavity = _cavity()
    ss = solve_steady_state(cavity, mode)
    omegas = frequency_grid(mode)
    spectrum = dns(mode, cavity, ss, env, 0.0, omegas)
    assert spectrum.convention is SpectrumConvention.TWO_SIDED
    variance = 2 * trapezoid(spectrum.values, omegas) / (2 * math.pi)
    assert variance == pytest.approx(K_B * 1.0 / (MASS * OMEGA_M ** 2), rel=0.05)


def test_decoupled_spectrum_is_bare_lorentzian(env):
    mode = _mode(damping=1.0)
    cavity = _cavity(chi=1e10)
    ss = solve_steady_state(cavity, mode)
    omegas = frequency_grid(mode, points=101)
    values = dns(mode, cavity, ss, env, 0.0, omegas).values
    bare = 2 * K_B * 1.0 * MASS / (MASS ** 2 * ((OMEGA_M ** 2 - omegas ** 2) ** 2 + omegas ** 2))
    np.testing.assert_allclose(values, bare, rtol=1e-12)


def test_vanishing_drive_converges_to_bare_lorentzian(env):
    mode = _mode(coupling=1e10, damping=1.0)
    cavity = _cavity(chi=1e10, flux=1e-300, delta0=5e5)
    ss = solve_steady_state(cavity, mode)
    omegas = frequency_grid(mode, points=101)
    values = dns(mode, cavity, ss, env, 0.0, omegas).values
    bare = 2 * K_B * 1.0 * MASS / (MASS ** 2 * ((OMEGA_M ** 2 - omegas ** 2) ** 2 + omegas ** 2))
    np.testing.assert_allclose(values, bare, rtol=1e-9)


def test_csl_component_is_linear_in_eta(env):
    mode = _mode(damping=1.0)
    cavity = _cavity()
    ss = solve_steady_state(cavity, mode)
    omegas = frequency_grid(mode, points=101)
    base = dns(mode, cavity, ss, env, 0.0, omegas).values
    single = dns(mode, cavity, ss, env, 1e33, omegas).values - base
    double = dns(mode, cavity, ss, env, 2e33, omegas).values - base
    np.testing.assert_allclose(double, 2 * single, rtol=1e-9)


def test_csl_acts_as_extra_temperature():
    mode = _mode(coupling=1e10, damping=1.0)
    cavity = _cavity(chi=1e10, flux=1e12, delta0=5e5)
    ss = SteadyState(1e6, 5e5, 0.0, 0.0)
    eta = 1e33
    delta_t = delta_t_csl(mode, eta)
    omegas = frequency_grid(mode, points=201)
    with_csl = dns(mode, cavity, ss, GasEnvironment.he4(1.0, 1e-9), eta, omegas).values
    heated = dns(mode, cavity, ss, GasEnvironment.he4(1.0 + delta_t, 1e-9), 0.0, omegas).values
    np.testing.assert_allclose(with_csl, heated, rtol=1e-9)


def test_spectrum_positive_and_one_sided(env):
    mode = _mode(coupling=1e10, damping=1.0)
    cavity = _cavity(chi=1e10, flux=1e12, delta0=5e5)
    ss = solve_steady_state(cavity, mode)
    spectrum = dns(mode, cavity, ss, env, 1e20, frequency_grid(mode, points=51))
    assert np.all(spectrum.values > 0)
    one = spectrum.one_sided()
    assert one.convention is SpectrumConvention.ONE_SIDED
    np.testing.assert_allclose(one.values, 2 * spectrum.values)
    no_rp = dns(mode, cavity, ss, env, 1e20, spectrum.frequencies, include_radiation_pressure=False)
    assert np.all(no_rp.values < spectrum.values)


def test_zero_frequency_rejected(env):
    mode = _mode()
    cavity = _cavity()
    ss = solve_steady_state(cavity, mode)
    with pytest.raises(DomainError):
        dns(mode, cavity, ss, env, 0.0, np.array([0.0, 1.0]))


def test_delta_t_csl():
    mode = _mode(damping=1.0)
    assert delta_t_csl(mode, 0.0) == 0.0
    assert delta_t_csl(mode, 2e30) == pytest.approx(2 * delta_t_csl(mode, 1e30), rel=1e-15)
    assert delta_t_csl(mode, 1e30) == pytest.approx(HBAR ** 2 * 1e30 / (2 * K_B * MASS), rel=1e-15)
    with pytest.raises(DomainError, match="gas damping"):
        delta_t_csl(_mode(damping=0.0), 1e30)


def test_coin_rotation_heats_more_than_vibration(cryo_helium):
    geom = CylinderGeometry.from_aspect_ratio(1e-8, 100.0, 2200.0)
    damping = gas_damping(geom, cryo_helium)
    csl = CslParams(1.0, 1e-7)
    vib = vibration_mode(geom, damping, OMEGA_M, 0.0)
    rot = rotation_mode(geom, damping, OMEGA_M, 0.0)
    assert rot.inertia == geom.moment_of_inertia
    delta_rot = delta_t_csl(rot, eta_cylinder(geom, DiffusionKind.ROT, csl))
    delta_vib = delta_t_csl(vib, eta_cylinder(geom, DiffusionKind.VIB_PERP, csl))
    assert delta_rot > delta_vib > 0


def test_coin_excess_temperatures(coin, cryo_helium):
    # R = 0.1 mm, L = 0.1 um, lambda = 1/s, r_C = 0.1 um
    damping = gas_damping(coin, cryo_helium)
    csl = CslParams(1.0, 1e-7)
    rot = rotation_mode(coin, damping, OMEGA_M, 0.0)
    vib = vibration_mode(coin, damping, OMEGA_M, 0.0)
    eta_rot = eta_cylinder(coin, DiffusionKind.ROT, csl)
    assert eta_rot == pytest.approx(7.646789594746962e30, rel=1e-6)
    assert delta_t_csl(rot, eta_rot) == pytest.approx(1.253879334872181e13, rel=1e-6)
    delta_vib = delta_t_csl(vib, eta_cylinder(coin, DiffusionKind.VIB_PERP, csl))
    assert delta_vib == pytest.approx(2.743180892394818e10, rel=1e-6)
