import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from starkbragg.atomic import MediumParams
from starkbragg.errors import DegenerateSteadyStateError, InfeasibleMatchError, ParameterError
from starkbragg.liouville import (
    N_LEVELS,
    DriveConfig,
    LevelScheme,
    LiouvilleModel,
    build_liouvillian,
    calibrate_pump,
    central_window,
    compare_bare_ladder,
    compare_two_level,
    drive_at,
    inversion,
    model_at,
    probe_susceptibility,
    scheme_from_system,
    steady_state,
)

SCHEME = LevelScheme(0.3e9, 0.8e9, 0.2e9, 45.0, 15.0, 20e9)
MEDIUM = MediumParams(1.4e27, 813.2e-9, 1.82)
ER_DRIVE = DriveConfig(2.449e9, 10e9, 7.384e9, 18.09e9)

drives = st.builds(
    DriveConfig,
    s_rabi=st.floats(0, 5e9),
    s_detuning=st.floats(1e9, 3e10),
    c_rabi=st.floats(0, 1e10),
    c_detuning=st.floats(1e9, 3e10),
    probe_rabi=st.floats(0, 1e8),
)


def _random_hermitian(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(N_LEVELS, N_LEVELS)) + 1j * rng.normal(size=(N_LEVELS, N_LEVELS))
    return a + a.conj().T


def _apply(L, rho):
    return (L @ rho.reshape(-1)).reshape(N_LEVELS, N_LEVELS)


@given(drives, st.floats(-2e9, 2e9), st.integers(0, 2**31))
def test_trace_and_hermiticity_preserved(drive, x, seed):
    L = build_liouvillian(SCHEME, drive, x, pump_rate=5e4)
    rho = _random_hermitian(seed)
    out = _apply(L, rho)
    scale = np.abs(L).max() * np.abs(rho).max()
    assert abs(np.trace(out)) <= 1e-12 * scale
    np.testing.assert_allclose(out, out.conj().T, atol=1e-12 * scale)


@given(drives, st.floats(1.0, 4e5))
def test_steady_state_invariants(drive, pump):
    L = build_liouvillian(SCHEME, drive, 1e8, pump)
    ss = steady_state(L)
    rho = ss.rho
    assert abs(np.trace(rho) - 1) <= 1e-12
    np.testing.assert_allclose(rho, rho.conj().T, atol=1e-12)
    assert np.all(np.real(np.diag(rho)) >= -1e-10)
    assert ss.residual_norm <= 1e-10 * np.linalg.norm(L)


def test_coherence_decays_hit_targets():
    for pump in (0.0, 5e4, 3e5):
        decay = SCHEME.coherence_decay(pump)
        for (i, j), target in SCHEME.coherence_targets().items():
            assert decay[i, j] == pytest.approx(target, rel=1e-9)
    L = build_liouvillian(SCHEME, DriveConfig(), 0.0, 0.0)
    # with no coherent coupling the coherence block of L is diagonal with the decay rates
    assert -L[1 * 5 + 2, 1 * 5 + 2].real == pytest.approx(0.3e9, rel=1e-9)
    assert -L[2 * 5 + 3, 2 * 5 + 3].real == pytest.approx(0.8e9, rel=1e-9)
    assert -L[2 * 5 + 4, 2 * 5 + 4].real == pytest.approx(0.2e9, rel=1e-9)


def test_pure_decay_relaxes_to_ground():
    L = build_liouvillian(SCHEME, DriveConfig(), 0.0, 0.0)
    rho = steady_state(L).rho
    expected = np.zeros((5, 5))
    expected[1, 1] = 1.0
    np.testing.assert_allclose(rho, expected, atol=1e-12)
    # level 2 alone decays towards 1 at the radiative rate
    rho2 = np.zeros((5, 5), dtype=complex)
    rho2[2, 2] = 1.0
    d = _apply(L, rho2)
    assert d[2, 2].real == pytest.approx(-45.0)
    assert d[1, 1].real == pytest.approx(45.0)


def test_negative_dephasing_rejected():
    bad = LevelScheme(1e3, 0.8e9, 0.2e9, 45.0, 15.0, 20e9)
    with pytest.raises(ParameterError):
        bad.dephasing(1e4)


def test_degenerate_steady_state():
    # level 0 neither decays nor couples: two independent stationary states
    scheme = replace(SCHEME, relax_0=0.0)
    with pytest.raises(DegenerateSteadyStateError):
        steady_state(build_liouvillian(scheme, DriveConfig(), 0.0, 1e3))


@pytest.mark.parametrize("rabi, x", [(2e5, 0.0), (1e6, 3e5), (5e5, -1e6)])
def test_two_level_saturation_closed_form(rabi, x):
    # radiatively broadened: coherence decay = Gamma/2, no pure dephasing
    gam = 1e6
    scheme = LevelScheme(gam / 2, 1e8, 5e7, gam, 1e3, 20e9, upper_probe=False)
    assert scheme.dephasing()[1, 2] == 0.0
    rho = steady_state(build_liouvillian(scheme, DriveConfig(probe_rabi=rabi), x, 0.0)).rho
    omega = 2 * rabi  # full Rabi frequency; H carries the half-Rabi coupling
    g = gam / 2
    expected = (omega**2 / 4) / (x**2 + g**2 + omega**2 / 2)
    assert rho[2, 2].real == pytest.approx(expected, rel=1e-9)


def test_pump_calibration_hits_inversion():
    rate = calibrate_pump(SCHEME, ER_DRIVE, 1 / 24)
    rho = steady_state(build_liouvillian(SCHEME, ER_DRIVE, 0.0, rate)).rho
    assert inversion(rho, ER_DRIVE) == pytest.approx(1 / 24, rel=1e-9)
    # with the controls off the inversion is the bare one
    rate0 = calibrate_pump(SCHEME, DriveConfig(), 0.2)
    rho0 = steady_state(build_liouvillian(SCHEME, DriveConfig(), 0.0, rate0)).rho
    assert (rho0[2, 2] - rho0[1, 1]).real / rho0[2, 2].real == pytest.approx(0.2, rel=1e-9)


def test_unreachable_inversion():
    # a narrow 1-2 coherence caps the pump rate before the inversion reaches p
    narrow = LevelScheme(1e3, 0.8e9, 500.0, 45.0, 15.0, 20e9, relax_0=100.0, relax_4=100.0)
    with pytest.raises(InfeasibleMatchError):
        calibrate_pump(narrow, DriveConfig(), 0.99)


def test_two_level_reduction(er_system):
    assert compare_two_level(er_system).deviation <= 1e-3


def test_controls_off_ladder_is_exact(er_system):
    assert compare_bare_ladder(er_system).deviation <= 1e-9


def test_controls_off_matched_ladder_is_real():
    # equal widths, gamma_rad_32 = p gamma_rad_21 balances gain and absorption
    p = 0.2
    g = 0.3e9
    scheme = LevelScheme(g, g, 0.1e9, 45.0, p * 45.0, 2e9)
    delta = scheme.omega_split / 2  # two-photon resonance
    scan = probe_susceptibility(scheme, DriveConfig(), [delta], p, MEDIUM)
    chi = scan.chi[0]
    peak = MEDIUM.prefactor * 45.0 * p / (2 - p) / g
    assert abs(chi.imag) <= 1e-3 * peak
    assert abs(chi.real) > 0.1 * peak


def test_linear_matches_finite_difference(er_system):
    model = model_at(er_system)
    g = er_system.t21.gamma
    for dp in central_window(er_system, 5):
        lin = model.chi_linear(dp)
        fin = model.chi_finite(dp, 1e-3 * g)
        assert abs(fin - lin) <= 5e-3 * abs(lin)


def test_finite_mode_warns_when_saturated():
    drive = DriveConfig(probe_rabi=3e5)
    with pytest.warns(RuntimeWarning, match="saturation"):
        scan = probe_susceptibility(SCHEME, drive, [0.0], 0.2, MEDIUM, mode="finite")
    assert scan.warnings


def test_linear_mode_warns_on_strong_probe():
    drive = DriveConfig(probe_rabi=1e8)
    with pytest.warns(RuntimeWarning, match="not weak"):
        probe_susceptibility(SCHEME, drive, [0.0], 0.2, MEDIUM)
    with pytest.raises(ParameterError):
        probe_susceptibility(SCHEME, DriveConfig(), [0.0], 0.2, MEDIUM, mode="finite")
    with pytest.raises(ParameterError):
        probe_susceptibility(SCHEME, DriveConfig(), [0.0], 0.2, MEDIUM, mode="other")


def test_scan_order_independent(er_system):
    model = model_at(er_system)
    dp = central_window(er_system, 9)
    fwd = probe_susceptibility(model.scheme, model.drive, dp, er_system.pump_p, MEDIUM, model=model).chi
    rev = probe_susceptibility(model.scheme, model.drive, dp[::-1], er_system.pump_p, MEDIUM, model=model).chi
    assert np.array_equal(fwd, rev[::-1])
    samples = probe_susceptibility(model.scheme, model.drive, dp[:2], er_system.pump_p, MEDIUM,
                                   model=model, position=0.0).samples
    assert samples[0].position == 0.0 and samples[0].chi == fwd[0]


def test_absorption_bound_over_position(er_system):
    # transparency point scanned over one modulation period
    zs = np.linspace(0, er_system.modulation_wavelength / 2, 21)
    im = [abs(model_at(er_system, z).chi_linear(er_system.transparency_detuning).imag) for z in zs]
    assert 0.0033 / 2 <= max(im) <= 0.0033 * 2


def test_drive_at_standing_wave(er_system):
    lam = er_system.modulation_wavelength
    assert drive_at(er_system, 0.0).s_rabi == er_system.s_field.rabi
    assert abs(drive_at(er_system, lam / 4).s_rabi) < 1e-6 * er_system.s_field.rabi
    sch = scheme_from_system(er_system)
    assert (sch.gamma_21, sch.gamma_32, sch.gamma_42) == (0.3e9, 0.8e9, 0.2e9)
