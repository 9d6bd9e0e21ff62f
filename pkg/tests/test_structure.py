import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from starkbragg.errors import AmplificationOverflowError, GridError, ParameterError
from starkbragg.structure import (
    Grid1D,
    IndexProfile,
    bragg_period,
    build_profile,
    coupling_constant,
    figure_data,
    fwhm,
    period_counts,
    probe_wavelength,
    spectrum,
    transfer_matrix,
    transfer_matrix_layers,
)

LAM = 813.2e-9
NBG = 1.82


def _profile(n, kappa=None, dz=10e-9):
    n = np.asarray(n, dtype=float)
    kappa = np.zeros_like(n) if kappa is None else np.asarray(kappa, dtype=float)
    return IndexProfile(Grid1D(0.0, dz, len(n)), n, kappa, np.zeros(len(n), dtype=complex))


def _qws_oracle(n1, n2, pairs, n_in, n_out):
    # closed form for (H L)^N between identical media equal to... general: admittance Y = (n2/n1)^(2N) n_out
    y = (n1 / n2) ** (2 * pairs) * n_out
    return ((n_in - y) / (n_in + y)) ** 2


def _airy_slab(n_slab, n_host, d, lam):
    r01 = (n_host - n_slab) / (n_host + n_slab)
    ph = np.exp(2j * 2 * np.pi / lam * n_slab * d)
    r = r01 * (1 - ph) / (1 - r01**2 * ph)
    return abs(r) ** 2


def test_grid_contract():
    with pytest.raises(GridError):
        Grid1D(0.0, 0.0, 10)
    with pytest.raises(GridError):
        Grid1D(0.0, 1e-9, 1)
    g = Grid1D.periodic(200e-9, 3, 40)
    assert g.count == 120 and g.length == pytest.approx(600e-9)
    assert g.centers[0] == pytest.approx(2.5e-9)


def test_profile_validation():
    with pytest.raises(GridError):
        IndexProfile(Grid1D(0.0, 1e-9, 3), np.ones(2), np.zeros(2), np.zeros(2))
    with pytest.raises(ParameterError):
        _profile([1.0, -1.0])


def test_resolution_contract(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    with pytest.raises(GridError):
        build_profile(er_system, Grid1D.periodic(per, 2, 19), er_system.transparency_detuning)
    build_profile(er_system, Grid1D.periodic(per, 2, 20), er_system.transparency_detuning)
    with pytest.raises(ParameterError):
        build_profile(er_system, Grid1D.periodic(per, 2, 20), 0.0, chi_source="other")


def test_bragg_period_examples():
    bp = bragg_period(LAM / NBG)
    assert bp.period == pytest.approx(223.4e-9, rel=1e-3)
    assert bp.lambda_s == LAM / NBG
    assert bragg_period(2 * LAM).period == pytest.approx(2 * bragg_period(LAM).period)
    with pytest.raises(ParameterError):
        bragg_period(0.0)


def test_period_counts(er_system):
    counts = period_counts(100e-6, er_system.medium)
    assert round(counts["medium_wavelength"]) == 448
    assert int(counts["vacuum_wavelength"]) == 245


def test_uniform_matched_profile_is_transparent():
    res = transfer_matrix(_profile(np.full(500, NBG)), LAM, NBG, NBG)
    assert res.R == pytest.approx(0.0, abs=1e-28)
    assert res.T == pytest.approx(1.0, abs=1e-12)


@given(st.floats(1.3, 2.0), st.floats(2.05, 3.5), st.integers(1, 15), st.floats(1.0, 1.6))
def test_quarter_wave_stack(n1, n2, pairs, n_out):
    lam = 1e-6
    n = np.tile([n1, n2], pairs)
    d = np.tile([lam / (4 * n1), lam / (4 * n2)], pairs)
    res = transfer_matrix_layers(n, d, lam, 1.0, n_out)
    assert res.R == pytest.approx(_qws_oracle(n1, n2, pairs, 1.0, n_out), abs=1e-9)


@given(st.lists(st.floats(1.0, 3.0), min_size=2, max_size=60), st.floats(400e-9, 1.2e-6))
def test_lossless_unitarity_and_reciprocity(ns, lam):
    prof = _profile(ns, dz=37e-9)
    fwd = transfer_matrix(prof, lam, NBG, NBG)
    back = transfer_matrix(prof.reversed(), lam, NBG, NBG)
    assert abs(1 - fwd.R - fwd.T) < 1e-9
    assert fwd.R == pytest.approx(back.R, abs=1e-12)
    assert fwd.A == pytest.approx(0.0, abs=1e-9)


def test_absorbing_slab_attenuates():
    # nearly index-matched absorber: Beer-Lambert up to the (k/2n)^2 facet mismatch
    k, d = 1e-3, 50e-6
    res = transfer_matrix(_profile(np.full(1000, NBG), np.full(1000, k), dz=d / 1000), LAM, NBG, NBG)
    assert res.T == pytest.approx(math.exp(-4 * math.pi * k * d / LAM), rel=1e-6)
    gain = transfer_matrix(_profile(np.full(1000, NBG), np.full(1000, -k), dz=d / 1000), LAM, NBG, NBG)
    assert gain.T > 1


@given(st.floats(1.5, 2.5), st.floats(1e-6, 20e-6))
def test_uniform_slab_matches_airy(n_slab, d):
    res = transfer_matrix(_profile(np.full(64, n_slab), dz=d / 64), LAM, NBG, NBG)
    assert res.R == pytest.approx(_airy_slab(n_slab, NBG, d, LAM), abs=1e-10)


@pytest.mark.parametrize("kl", [0.5, 1.0, 2.0, 3.0])
def test_coupled_mode_limit(kl):
    period = LAM / (2 * NBG)
    n_periods = 400
    per = 40
    dn = kl / (math.pi / LAM * n_periods * period)
    grid = Grid1D.periodic(period, n_periods, per)
    n = NBG + dn * np.cos(2 * np.pi * grid.centers / period)
    prof = IndexProfile(grid, n, np.zeros_like(n), np.zeros_like(n, dtype=complex))
    kappa = coupling_constant(prof, period, LAM)
    assert kappa * grid.length == pytest.approx(kl, rel=2e-3)
    res = transfer_matrix(prof, LAM, NBG, NBG)
    assert res.R == pytest.approx(math.tanh(kappa * grid.length) ** 2, rel=0.05)


def test_grid_convergence_order(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    dp = er_system.transparency_detuning
    lam = probe_wavelength(er_system, dp)
    Rs = [transfer_matrix(build_profile(er_system, Grid1D.periodic(per, 245, m), dp), lam, NBG, NBG).R
          for m in (40, 80, 160)]
    order = math.log2(abs(Rs[1] - Rs[0]) / abs(Rs[2] - Rs[1]))
    assert order >= 2.0


def test_overflow_reports_position():
    n = np.full(200, NBG)
    prof = _profile(n, np.full(200, -80.0), dz=100e-9)
    with pytest.raises(AmplificationOverflowError) as err:
        transfer_matrix(prof, LAM, NBG, NBG)
    assert err.value.z is not None and 0 < err.value.z <= 200 * 100e-9
    assert err.value.exit_code == 5


def test_transparency_profile_is_lossless(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    prof = build_profile(er_system, Grid1D.periodic(per, 3, 40), er_system.transparency_detuning)
    assert np.abs(prof.chi_res.imag).max() < 0.0033
    assert np.abs(prof.kappa).max() < 1e-12


def test_profile_has_modulation_period(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    prof = build_profile(er_system, Grid1D.periodic(per, 4, 40), er_system.transparency_detuning)
    np.testing.assert_allclose(prof.n[:40], prof.n[40:80], rtol=1e-12)
    assert prof.n.max() - prof.n.min() > 1e-3


def test_drives_off_profile_is_uniform(er_preset):
    from starkbragg.config import load_preset

    sys = load_preset("zero_modulation").system()
    per = bragg_period(sys.medium.lambda_medium).period
    prof = build_profile(sys, Grid1D.periodic(per, 3, 40), 0.0)
    assert np.ptp(prof.n) == 0 and np.ptp(prof.kappa) == 0


def test_gain_absorption_alternate_when_detuned(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    dp = er_system.transparency_detuning + er_system.t21.gamma / 20
    prof = build_profile(er_system, Grid1D.periodic(per, 2, 80), dp)
    k = prof.kappa
    assert k.max() > 0 > k.min()
    np.testing.assert_allclose(k[:80], k[80:], rtol=1e-9, atol=1e-15)
    # sign changes twice per period
    assert np.count_nonzero(np.diff(np.sign(k[:80]))) == 2


def test_liouville_profile_reuses_phases(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    grid = Grid1D.periodic(per, 2, 20)
    dp = er_system.transparency_detuning
    a = build_profile(er_system, grid, dp, chi_source="liouville")
    b = build_profile(er_system, grid, dp, chi_source="liouville")
    assert np.array_equal(a.chi_res, b.chi_res)
    np.testing.assert_array_equal(a.chi_res[:20], a.chi_res[20:])
    from starkbragg.liouville import model_at

    direct = model_at(er_system, float(grid.centers[3])).chi_linear(dp)
    assert a.chi_res[3] == pytest.approx(direct, rel=1e-9)


def test_spectrum_threads_bit_identical(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    grid = Grid1D.periodic(per, 50, 40)
    off = np.linspace(-1e9, 1e9, 9)
    one = spectrum(er_system, grid, off, threads=1)
    four = spectrum(er_system, grid, off, threads=4)
    assert np.array_equal(one.R, four.R) and np.array_equal(one.T, four.T)


def test_thread_env(monkeypatch):
    from starkbragg.structure import thread_count

    monkeypatch.setenv("STARKBRAGG_THREADS", "0")
    assert thread_count() >= 1
    monkeypatch.setenv("STARKBRAGG_THREADS", "3")
    assert thread_count() == 3


def test_lossless_spectrum_unitary(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    sp = spectrum(er_system, Grid1D.periodic(per, 245, 40), np.linspace(-1e9, 1e9, 11), lossless=True)
    assert np.all(np.abs(sp.A) < 1e-9)
    assert np.all(sp.R >= 0) and np.all(sp.T >= 0)


def test_lossless_peak_at_transparency(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    off = np.linspace(-0.3e9, 0.3e9, 41)
    sp = spectrum(er_system, Grid1D.periodic(per, 245, 40), off, lossless=True)
    assert abs(sp.peak_detuning) <= off[1] - off[0]


@pytest.mark.xfail(strict=True, reason="dispersive gain off transparency lifts side lobes above the central peak")
def test_peak_at_transparency_with_dispersion(er_system):
    per = bragg_period(er_system.medium.lambda_medium).period
    off = np.linspace(-0.9e9, 0.9e9, 49)
    sp = spectrum(er_system, Grid1D.periodic(per, 245, 40), off)
    assert abs(sp.peak_detuning) <= off[1] - off[0]


def test_zero_modulation_reflectance():
    from starkbragg.config import load_preset

    pr = load_preset("zero_modulation")
    sys = pr.system()
    per = bragg_period(sys.medium.lambda_medium).period
    grid = Grid1D.periodic(per, 245, 40)
    sp = spectrum(sys, grid, [0.0, 1e8])
    # uniform slab with the resonant index between index-matched facets
    prof = build_profile(sys, grid, 0.0)
    nt = prof.n[0] + 1j * prof.kappa[0]
    assert sp.R[0] == pytest.approx(_airy_slab(nt, NBG, grid.length, probe_wavelength(sys, 0.0)), rel=1e-6)
    assert sp.R_peak < 1e-3


def test_fwhm_of_lorentzian():
    x = np.linspace(-10, 10, 20001)
    y = 1 / (1 + x**2)
    assert fwhm(x, y) == pytest.approx(2.0, abs=1e-6)
    assert math.isnan(fwhm(x, np.ones_like(x)))


def test_figure1(er_system):
    t = figure_data("fig1", er_system)
    d, norm = t.data[:, 0], t.data[:, 3]
    assert abs(d[np.argmax(norm)] - er_system.t21.gamma) <= d[1] - d[0]
    assert norm.max() == pytest.approx(1.0, rel=1e-4)
    assert np.all(t.data[:, 2] == 0)


def test_figure2_and_3(er_system):
    t2 = figure_data("2", er_system)
    assert t2.columns == ("z_m", "chi_re", "n")
    t3 = figure_data("3", er_system)
    per = 40
    a, b = t3.data[:, 1], t3.data[:, 2]
    np.testing.assert_allclose(a[:per], a[per:2 * per], rtol=1e-9, atol=1e-15)
    np.testing.assert_allclose(b[:per], b[per:2 * per], rtol=1e-9, atol=1e-15)
    for curve in (a[:per], b[:per]):
        assert curve.max() > 0 > curve.min()


def test_figure5_and_unknown(er_system):
    t = figure_data("5", er_system)
    assert t.columns == ("z_m", "chi_re", "chi_im", "n", "kappa")
    assert t.meta["max_abs_chi_im"] < 0.0033
    with pytest.raises(ParameterError):
        figure_data("4", er_system)
