"""Closed-form susceptibility models for the driven ladder and five-level schemes.

All rates, detunings and Rabi frequencies are ordinary frequencies in Hz.
Sign conventions: a transition detuning is ``transition - probe`` and
``Im chi > 0`` means absorption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, SingularDetuningError

GHz = 1e9
MHz = 1e6
nm = 1e-9
um = 1e-6
PER_CM3 = 1e6  # cm^-3 -> m^-3
C_LIGHT = 299792458.0


@dataclass(frozen=True)
class TwoLevelTransition:
    """One optical transition i -> j (upper i, lower j)."""

    frequency: float
    gamma_rad: float
    gamma: float
    pop_lower: float = 0.0
    pop_upper: float = 0.0

    def __post_init__(self):
        if not self.gamma_rad >= 0:
            raise ParameterError(f"gamma_rad must be >= 0, got {self.gamma_rad}")
        if not self.gamma > 0 or self.gamma < self.gamma_rad / 2:
            raise ParameterError(
                f"gamma={self.gamma} must be positive and >= gamma_rad/2={self.gamma_rad / 2}"
            )
        for name in ("pop_lower", "pop_upper"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {v}")

    @property
    def population_difference(self) -> float:
        """rho_lower - rho_upper (positive for an absorbing transition)."""
        return self.pop_lower - self.pop_upper


@dataclass(frozen=True)
class MediumParams:
    density: float
    lambda_vac: float
    n_background: float = 1.0

    def __post_init__(self):
        if not self.density > 0:
            raise ParameterError(f"density must be > 0, got {self.density}")
        if not self.lambda_vac > 0:
            raise ParameterError(f"lambda_vac must be > 0, got {self.lambda_vac}")
        if not self.n_background >= 1:
            raise ParameterError(f"n_background must be >= 1, got {self.n_background}")

    @property
    def lambda_medium(self) -> float:
        return self.lambda_vac / self.n_background

    @property
    def prefactor(self) -> float:
        """3 N lambda^3 / (8 pi^2), dimensionless; lambda is the in-medium wavelength."""
        return 3.0 * self.density * self.lambda_medium**3 / (8.0 * math.pi**2)


# weak-probe validity: rabi below this fraction of the narrowest linewidth
WEAK_PROBE_FRACTION = 0.1
# far-detuning validity: |detuning| above this multiple of the Rabi frequency
FAR_DETUNED_RATIO = 10.0


@dataclass(frozen=True)
class ProbeField:
    detuning_dp: float
    rabi: float = 0.0

    def is_weak(self, gamma_21: float, gamma_32: float) -> bool:
        return abs(self.rabi) < WEAK_PROBE_FRACTION * min(gamma_21, gamma_32)


@dataclass(frozen=True)
class ControlField:
    rabi: float
    detuning: float
    wavelength_medium: float | None = None

    @property
    def far_detuned(self) -> bool:
        return abs(self.detuning) > FAR_DETUNED_RATIO * abs(self.rabi)

    @property
    def xi(self) -> float:
        """|Omega|^2 / Delta^2."""
        _require_detuning(self.detuning, "control field")
        return self.rabi**2 / self.detuning**2


@dataclass(frozen=True)
class FiveLevelSystem:
    """The driven five-level scheme reduced by two control fields.

    ``t21`` and ``t32`` carry the radiative and total decoherence rates of the
    lower (2-1) and upper (3-2) probe transitions. Populations follow the
    convention rho_1 + rho_2 = 1, rho_3 = 0, so rho_2 = 1 / (2 - p).
    ``omega_split`` is omega_21 - omega_32: the bare 2-3 line lies that far
    below the 1-2 line.
    """

    t21: TwoLevelTransition
    t32: TwoLevelTransition
    omega_split: float
    gamma_42: float
    pump_p: float
    s_field: ControlField
    c_field: ControlField
    medium: MediumParams

    def __post_init__(self):
        if not 0.0 < self.pump_p <= 1.0:
            raise ParameterError(f"pump_p must lie in (0, 1], got {self.pump_p}")
        if not 0.0 < self.gamma_42 < min(self.t21.gamma, self.t32.gamma):
            raise ParameterError(
                "gamma_42 must satisfy 0 < gamma_42 < min(gamma_21, gamma_32)"
            )

    @property
    def rho_2(self) -> float:
        return 1.0 / (2.0 - self.pump_p)

    @property
    def rho_1(self) -> float:
        return 1.0 - self.rho_2

    @property
    def mean_stark_shift(self) -> float:
        """|Omega_s|^2 / (2 Delta_s), the constant part of the level-2 shift."""
        _require_detuning(self.s_field.detuning, "s field")
        return self.s_field.rabi**2 / (2.0 * self.s_field.detuning)

    @property
    def transparency_detuning(self) -> float:
        """Probe detuning resonant with the dressed 1-2 transition."""
        return -self.mean_stark_shift

    @property
    def modulation_wavelength(self) -> float:
        lam = self.s_field.wavelength_medium
        return self.medium.lambda_medium if lam is None else lam


@dataclass(frozen=True)
class SusceptibilitySample:
    detuning: float
    chi: complex
    position: float | None = None


def _require_detuning(delta, what):
    if delta == 0 or not np.isfinite(delta):
        raise SingularDetuningError(f"{what}: detuning must be finite and nonzero, got {delta}")


def chi_ladder(t21: TwoLevelTransition, t32: TwoLevelTransition, medium: MediumParams, probe_freq):
    """Susceptibility of a three-level ladder probed on both transitions.

    Sum of the two two-level Lorentzians; ``t21.pop_upper`` and
    ``t32.pop_lower`` are both the population of the middle level and should
    agree. ``probe_freq`` and the transition frequencies may be arrays that
    broadcast against each other.
    """
    probe_freq = np.asarray(probe_freq, dtype=float)
    if np.any(probe_freq <= 0):
        raise ParameterError("probe_freq must be > 0")
    d21 = np.asarray(t21.frequency) - probe_freq
    d32 = np.asarray(t32.frequency) - probe_freq
    term21 = t21.gamma_rad * t21.population_difference / (d21 - 1j * t21.gamma)
    term32 = t32.gamma_rad * t32.population_difference / (d32 - 1j * t32.gamma)
    out = medium.prefactor * (term21 + term32)
    return out[()] if out.ndim == 0 else out


def matched_amplitude(medium: MediumParams, gamma_rad_21: float, pop_diff_21: float) -> float:
    """3 N lambda^3 gamma_rad_21 (rho_1 - rho_2) / (8 pi^2), in Hz."""
    return medium.prefactor * gamma_rad_21 * pop_diff_21


def chi_matched(amplitude: float, gamma: float, delta):
    """Purely real susceptibility of the amplitude- and width-matched ladder.

    ``delta`` is the shift of the middle level (the lower-transition detuning).
    """
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    delta = np.asarray(delta, dtype=float)
    re = amplitude * 2.0 * delta / (delta**2 + gamma**2)
    out = re + 0j
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class StarkShift:
    constant: float
    amplitude: float
    k_s: float

    def __call__(self, z):
        return self.constant + self.amplitude * np.cos(2.0 * self.k_s * np.asarray(z, dtype=float))


def stark_decomposition(s_field: ControlField) -> StarkShift:
    _require_detuning(s_field.detuning, "s field")
    if s_field.wavelength_medium is None or not s_field.wavelength_medium > 0:
        raise ParameterError("s field needs a positive wavelength_medium")
    half = -abs(s_field.rabi) ** 2 / (2.0 * s_field.detuning)
    return StarkShift(half, half, 2.0 * math.pi / s_field.wavelength_medium)


def stark_shift(s_field: ControlField, z):
    """ac-Stark shift of level 2 (Hz) in a standing-wave control field."""
    return stark_decomposition(s_field)(z)


def delta_of_z(s_field: ControlField, z, omega_split: float | None = None):
    """Local middle-level offset after absorbing the constant Stark shift.

    With ``omega_split=None`` the ladder is assumed exactly tuned
    (omega_32 - omega_21 = -|Omega_s|^2/Delta_s). Any mistuning is carried as
    a constant residual of half the excess splitting.
    """
    sh = stark_decomposition(s_field)
    z = np.asarray(z, dtype=float)
    depth = abs(s_field.rabi) ** 2 / (2.0 * s_field.detuning)
    residual = 0.0
    if omega_split is not None:
        residual = 0.5 * (omega_split + abs(s_field.rabi) ** 2 / s_field.detuning)
    out = depth * np.cos(2.0 * sh.k_s * z) + residual
    return out[()] if out.ndim == 0 else out


def chi_effective_terms(sys: FiveLevelSystem, probe: ProbeField, local_delta):
    """One-photon (lower) and two-photon (upper) terms of the effective ladder.

    The lower term carries rho_1 - rho_2 = -p/(2-p): the 2-1 transition is
    inverted, so it contributes gain.
    """
    p = sys.pump_p
    xi = sys.c_field.xi
    _require_detuning(sys.s_field.detuning, "s field")
    local_delta = np.asarray(local_delta, dtype=float)
    K = sys.medium.prefactor
    shift = sys.s_field.rabi**2 / (2.0 * sys.s_field.detuning)
    dp = probe.detuning_dp
    a1 = -sys.t21.gamma_rad * p / (2.0 - p)
    a2 = xi * sys.t32.gamma_rad / ((2.0 - p) * (1.0 + 2.0 * xi))
    width2 = sys.gamma_42 * (1.0 - xi) + sys.t32.gamma * xi
    pos2 = dp - sys.omega_split - shift - local_delta + sys.c_field.detuning * (1.0 + xi - xi**2)
    one = K * a1 / (dp + shift + local_delta - 1j * sys.t21.gamma)
    two = K * a2 / (pos2 - 1j * width2)
    if one.ndim == 0:
        return one[()], two[()]
    return one, two


def chi_effective(sys: FiveLevelSystem, probe: ProbeField, local_delta):
    one, two = chi_effective_terms(sys, probe, local_delta)
    return one + two


def n_of_chi(chi_res, medium: MediumParams):
    """Real index and extinction from the resonant susceptibility on top of the host."""
    chi_host = medium.n_background**2 - 1.0
    ntilde = np.sqrt(1.0 + chi_host + np.asarray(chi_res, dtype=complex))
    n, kappa = ntilde.real, ntilde.imag
    if n.ndim == 0:
        return float(n), float(kappa)
    return n, kappa
