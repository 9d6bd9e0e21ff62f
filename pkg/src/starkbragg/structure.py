"""Index profiles of the Stark-modulated medium and their transfer-matrix spectra."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .atomic import (
    C_LIGHT,
    ControlField,
    FiveLevelSystem,
    MediumParams,
    ProbeField,
    TwoLevelTransition,
    chi_effective,
    chi_ladder,
    chi_matched,
    delta_of_z,
    n_of_chi,
)
from .errors import AmplificationOverflowError, GridError, ParameterError

MIN_SAMPLES_PER_PERIOD = 20
DEFAULT_LAYERS_PER_PERIOD = 40


@dataclass(frozen=True)
class Grid1D:
    z0: float
    dz: float
    count: int

    def __post_init__(self):
        if not self.dz > 0:
            raise GridError(f"dz must be > 0, got {self.dz}")
        if self.count < 2:
            raise GridError(f"count must be >= 2, got {self.count}")

    @property
    def length(self) -> float:
        return self.dz * self.count

    @property
    def centers(self) -> np.ndarray:
        return self.z0 + (np.arange(self.count) + 0.5) * self.dz

    @classmethod
    def periodic(cls, period: float, n_periods: int, per_period: int = DEFAULT_LAYERS_PER_PERIOD, z0: float = 0.0):
        return cls(z0, period / per_period, n_periods * per_period)


@dataclass(frozen=True)
class IndexProfile:
    grid: Grid1D
    n: np.ndarray
    kappa: np.ndarray
    chi_res: np.ndarray

    def __post_init__(self):
        for name in ("n", "kappa", "chi_res"):
            if len(getattr(self, name)) != self.grid.count:
                raise GridError(f"{name} has {len(getattr(self, name))} samples, grid has {self.grid.count}")
        if np.any(self.n <= 0):
            raise ParameterError("refractive index must be positive everywhere")

    @property
    def complex_index(self) -> np.ndarray:
        return self.n + 1j * self.kappa

    def reversed(self) -> "IndexProfile":
        return IndexProfile(self.grid, self.n[::-1].copy(), self.kappa[::-1].copy(), self.chi_res[::-1].copy())

    def lossless(self) -> "IndexProfile":
        return IndexProfile(self.grid, self.n, np.zeros_like(self.kappa), self.chi_res)


@dataclass(frozen=True)
class BraggPeriod:
    period: float
    lambda_s: float


def bragg_period(lambda_probe_medium: float) -> BraggPeriod:
    """Modulation period (half the in-medium probe wavelength) and the matching control wavelength."""
    if not lambda_probe_medium > 0:
        raise ParameterError("wavelength must be > 0")
    return BraggPeriod(lambda_probe_medium / 2.0, lambda_probe_medium)


def period_counts(length: float, medium: MediumParams) -> dict:
    """Number of modulation periods in ``length`` for in-medium and vacuum wavelengths."""
    return {
        "medium_wavelength": length / bragg_period(medium.lambda_medium).period,
        "vacuum_wavelength": length / bragg_period(medium.lambda_vac).period,
    }


def _check_resolution(grid: Grid1D, period: float):
    per = period / grid.dz
    if per < MIN_SAMPLES_PER_PERIOD:
        raise GridError(f"{per:.1f} samples per modulation period; need at least {MIN_SAMPLES_PER_PERIOD}")


def _reduced_positions(z: np.ndarray, period: float) -> tuple[np.ndarray, np.ndarray]:
    """Positions folded into one period, deduplicated so equal phases share one evaluation."""
    frac = np.mod(z / period, 1.0)
    keys = np.round(frac * 2**32).astype(np.int64) % 2**32
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    return frac[first] * period, inverse


def build_profile(
    sys: FiveLevelSystem,
    grid: Grid1D,
    probe_detuning: float,
    chi_source: str = "analytic",
    liouville_kw: dict | None = None,
) -> IndexProfile:
    """n(z), kappa(z) from the local susceptibility at layer centres."""
    lam_s = sys.modulation_wavelength
    period = lam_s / 2.0
    _check_resolution(grid, period)
    z = grid.centers
    if chi_source == "analytic":
        if sys.s_field.rabi == 0:
            delta = np.zeros_like(z)
        else:
            s_field = ControlField(sys.s_field.rabi, sys.s_field.detuning, lam_s)
            delta = delta_of_z(s_field, z)
        chi = np.asarray(chi_effective(sys, ProbeField(probe_detuning), delta), dtype=complex)
    elif chi_source == "liouville":
        from .liouville import model_at

        zr, inverse = _reduced_positions(z, period)
        vals = np.array([model_at(sys, float(zz), **(liouville_kw or {})).chi_linear(probe_detuning) for zz in zr])
        chi = vals[inverse]
    else:
        raise ParameterError(f"unknown chi_source {chi_source!r}")
    n, kappa = n_of_chi(chi, sys.medium)
    return IndexProfile(grid, np.atleast_1d(n), np.atleast_1d(kappa), np.atleast_1d(chi))


def _mul(a, b):
    """Elementwise product of stacks of 2x2 matrices given as 4-tuples (m00, m01, m10, m11)."""
    a00, a01, a10, a11 = a
    b00, b01, b10, b11 = b
    return (
        a00 * b00 + a01 * b10,
        a00 * b01 + a01 * b11,
        a10 * b00 + a11 * b10,
        a10 * b01 + a11 * b11,
    )


def _ordered_product(m):
    """Product m[0] @ m[1] @ ... @ m[-1] by pairwise reduction (fixed order)."""
    m = tuple(np.asarray(x) for x in m)
    while m[0].shape[0] > 1:
        k = m[0].shape[0]
        if k % 2:
            tail = tuple(x[-1:] for x in m)
            m = tuple(x[:-1] for x in m)
        else:
            tail = None
        even = tuple(x[0::2] for x in m)
        odd = tuple(x[1::2] for x in m)
        m = _mul(even, odd)
        if tail is not None:
            m = tuple(np.concatenate([x, t]) for x, t in zip(m, tail))
    return tuple(x[0] for x in m)


def layer_matrices(ntilde: np.ndarray, thickness, vacuum_wavelength: float):
    """Characteristic matrices of homogeneous layers (normal incidence, exp(-i w t) convention)."""
    phase = 2.0 * math.pi / vacuum_wavelength * ntilde * thickness
    c, s = np.cos(phase), np.sin(phase)
    return (c, -1j * s / ntilde, -1j * ntilde * s, c)


@dataclass(frozen=True)
class TransferResult:
    matrix: np.ndarray
    r: complex
    t: complex
    R: float
    T: float

    @property
    def A(self) -> float:
        return 1.0 - self.R - self.T


def _locate_overflow(mats, grid: Grid1D):
    acc = (1.0 + 0j, 0j, 0j, 1.0 + 0j)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(len(mats[0])):
            acc = _mul(acc, tuple(x[i] for x in mats))
            if not all(np.isfinite(v) for v in acc):
                return float(grid.z0 + (i + 1) * grid.dz)
    return None


def transfer_matrix(
    profile: IndexProfile,
    vacuum_wavelength: float,
    n_entry: float | None = None,
    n_exit: float | None = None,
) -> TransferResult:
    """Reflection and transmission of the layered profile between two half-spaces.

    The half-spaces default to the real index of the first and last layer.
    """
    nt = profile.complex_index
    n0 = float(nt[0].real) if n_entry is None else n_entry
    ns = float(nt[-1].real) if n_exit is None else n_exit
    mats = layer_matrices(nt, profile.grid.dz, vacuum_wavelength)
    with np.errstate(over="ignore", invalid="ignore"):
        m00, m01, m10, m11 = _ordered_product(mats)
    M = np.array([[m00, m01], [m10, m11]])
    if not np.all(np.isfinite(M)):
        raise AmplificationOverflowError("transfer matrix overflowed", _locate_overflow(mats, profile.grid))
    B = m00 + m01 * ns
    C = m10 + m11 * ns
    denom = n0 * B + C
    r = (n0 * B - C) / denom
    t = 2.0 * n0 / denom
    return TransferResult(M, complex(r), complex(t), float(abs(r) ** 2), float(ns / n0 * abs(t) ** 2))


def transfer_matrix_layers(ntilde, thickness, vacuum_wavelength: float, n_entry: float, n_exit: float) -> TransferResult:
    """Transfer matrix for explicit layers with individual thicknesses."""
    ntilde = np.asarray(ntilde, dtype=complex)
    thickness = np.asarray(thickness, dtype=float)
    m00, m01, m10, m11 = _ordered_product(layer_matrices(ntilde, thickness, vacuum_wavelength))
    B = m00 + m01 * n_exit
    C = m10 + m11 * n_exit
    denom = n_entry * B + C
    r = (n_entry * B - C) / denom
    t = 2.0 * n_entry / denom
    M = np.array([[m00, m01], [m10, m11]])
    return TransferResult(M, complex(r), complex(t), float(abs(r) ** 2), float(n_exit / n_entry * abs(t) ** 2))


def coupling_constant(profile: IndexProfile, period: float, vacuum_wavelength: float) -> float:
    """Coupled-mode kappa = pi * dn1 / lambda from the first Fourier harmonic of n(z)."""
    z = profile.grid.centers
    harmonic = np.sum(profile.n * np.exp(-2j * math.pi * z / period)) * profile.grid.dz / profile.grid.length
    dn1 = 2.0 * abs(harmonic)
    return math.pi * dn1 / vacuum_wavelength


@dataclass(frozen=True)
class ReflectanceSpectrum:
    detunings: np.ndarray
    R: np.ndarray
    T: np.ndarray
    transparency: float = 0.0

    @property
    def A(self) -> np.ndarray:
        return 1.0 - self.R - self.T

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.R))

    @property
    def R_peak(self) -> float:
        return float(self.R[self.peak_index])

    @property
    def peak_detuning(self) -> float:
        return float(self.detunings[self.peak_index])

    def fwhm(self) -> float:
        return fwhm(self.detunings, self.R)


def fwhm(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum around the global maximum, linearly interpolated."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    k = int(np.argmax(y))
    half = y[k] / 2.0
    left = k
    while left > 0 and y[left] >= half:
        left -= 1
    right = k
    while right < len(y) - 1 and y[right] >= half:
        right += 1
    if y[left] >= half or y[right] >= half:
        return float("nan")
    xl = x[left] + (half - y[left]) * (x[left + 1] - x[left]) / (y[left + 1] - y[left])
    xr = x[right - 1] + (half - y[right - 1]) * (x[right] - x[right - 1]) / (y[right] - y[right - 1])
    return float(xr - xl)


def probe_wavelength(sys: FiveLevelSystem, probe_detuning: float) -> float:
    """Vacuum probe wavelength at detuning delta_p = omega_21 - omega_p."""
    return C_LIGHT / (sys.t21.frequency - probe_detuning)


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("STARKBRAGG_THREADS", "1") or 1)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def spectrum(
    sys: FiveLevelSystem,
    grid: Grid1D,
    offsets,
    lossless: bool = False,
    chi_source: str = "analytic",
    threads: int | None = None,
) -> ReflectanceSpectrum:
    """R, T over probe detunings ``offsets`` measured from the transparency point.

    The profile is rebuilt at every detuning. Each point is computed
    independently, so the thread count never changes the result.
    """
    offsets = np.asarray(offsets, dtype=float)
    dp0 = sys.transparency_detuning
    n_bg = sys.medium.n_background

    def one(off):
        dp = dp0 + off
        prof = build_profile(sys, grid, dp, chi_source)
        if lossless:
            prof = prof.lossless()
        res = transfer_matrix(prof, probe_wavelength(sys, dp), n_bg, n_bg)
        return res.R, res.T

    workers = thread_count(threads)
    if workers == 1 or len(offsets) < 2:
        out = [one(o) for o in offsets]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(one, offsets))
    R = np.array([o[0] for o in out])
    T = np.array([o[1] for o in out])
    return ReflectanceSpectrum(offsets, R, T, dp0)


@dataclass(frozen=True)
class FigureTable:
    name: str
    columns: tuple
    data: np.ndarray
    meta: dict


def _matched_ladder(sys: FiveLevelSystem):
    """Lower and upper transitions of an amplitude- and width-matched ladder built from ``sys``."""
    g = sys.t21.gamma
    rho1, rho2 = sys.rho_1, sys.rho_2
    lower = TwoLevelTransition(sys.t21.frequency, sys.t21.gamma_rad, g, rho1, rho2)
    # gamma_rad_32 * rho_2 = -gamma_rad_21 * (rho_1 - rho_2)
    rad32 = sys.t21.gamma_rad * (rho2 - rho1) / rho2
    upper = TwoLevelTransition(sys.t21.frequency, rad32, g, rho2, 0.0)
    return lower, upper


def _shifted_ladder(sys: FiveLevelSystem, delta, probe_offset: float):
    """Ladder susceptibility with the middle level raised by ``delta``.

    The probe sits ``probe_offset`` below two-photon resonance.
    """
    lower, upper = _matched_ladder(sys)
    f0 = lower.frequency
    out = np.empty(len(delta), dtype=complex)
    for i, d in enumerate(delta):
        lo = TwoLevelTransition(f0 + d, lower.gamma_rad, lower.gamma, lower.pop_lower, lower.pop_upper)
        up = TwoLevelTransition(f0 - d, upper.gamma_rad, upper.gamma, upper.pop_lower, upper.pop_upper)
        out[i] = chi_ladder(lo, up, sys.medium, f0 - probe_offset)
    return out


def figure_data(which: str, sys: FiveLevelSystem, periods: int = 3, per_period: int = DEFAULT_LAYERS_PER_PERIOD, n_delta: int = 401) -> FigureTable:
    """Sampled curves behind figures 1, 2, 3 and 5.

    Column schemas:
      fig1: delta_hz, chi_re, chi_im, chi_norm (chi_re over the signed scale amplitude/gamma)
      fig2: z_m, chi_re, n
      fig3: z_m, chi_im_detuned_gamma_over_20, chi_im_detuned_gamma
      fig5: z_m, chi_re, chi_im, n, kappa
    """
    which = str(which).lower().removeprefix("fig")
    g = sys.t21.gamma
    medium = sys.medium
    amplitude = medium.prefactor * sys.t21.gamma_rad * (sys.rho_1 - sys.rho_2)
    period = sys.modulation_wavelength / 2.0
    z = (np.arange(periods * per_period) + 0.5) * period / per_period
    if which == "1":
        delta = np.linspace(-5 * g, 5 * g, n_delta)
        chi = chi_matched(amplitude, g, delta)
        # signed scale: chi_norm peaks at +1 at delta = +gamma whatever the sign of the inversion
        scale = amplitude / g
        data = np.column_stack([delta, chi.real, chi.imag, chi.real / scale])
        return FigureTable("fig1", ("delta_hz", "chi_re", "chi_im", "chi_norm"), data,
                           {"gamma_hz": g, "chi_scale": scale})
    if which in ("2", "3"):
        depth = g  # Omega_s^2 = 2 gamma Delta_s
        delta = depth * np.cos(4 * math.pi * z / sys.modulation_wavelength)
        if which == "2":
            chi = _shifted_ladder(sys, delta, 0.0)
            n, _ = n_of_chi(chi, medium)
            data = np.column_stack([z, chi.real, n])
            return FigureTable("fig2", ("z_m", "chi_re", "n"), data, {"period_m": period})
        chi_a = _shifted_ladder(sys, delta, g / 20.0)
        chi_b = _shifted_ladder(sys, delta, g)
        data = np.column_stack([z, chi_a.imag, chi_b.imag])
        return FigureTable("fig3", ("z_m", "chi_im_detuned_gamma_over_20", "chi_im_detuned_gamma"), data,
                           {"period_m": period, "detunings_hz": [g / 20.0, g]})
    if which == "5":
        grid = Grid1D(0.0, period / per_period, periods * per_period)
        prof = build_profile(sys, grid, sys.transparency_detuning)
        chi = prof.chi_res
        data = np.column_stack([grid.centers, chi.real, chi.imag, prof.n, prof.kappa])
        meta = {
            "period_m": period,
            "peak_to_peak_chi_re": float(chi.real.max() - chi.real.min()),
            "max_abs_chi_im": float(np.abs(chi.imag).max()),
            "index_modulation_fraction": float((prof.n.max() - prof.n.min()) / medium.n_background),
        }
        return FigureTable("fig5", ("z_m", "chi_re", "chi_im", "n", "kappa"), data, meta)
    raise ParameterError(f"unknown figure id {which!r}; expected one of 1, 2, 3, 5")
