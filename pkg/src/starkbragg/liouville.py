"""Steady-state master equation for the five-level scheme with a weak probe.

Basis ordering is |0>, |1>, |2>, |3>, |4>; density matrices are vectorised
row-major, so ``vec(rho)[i*5 + j] == rho[i, j]``.

Rotating frame (all entries in Hz, probe detuning x = omega_21 - omega_p)::

    H[1,1] = 0             H[2,2] = x
    H[0,0] = x - Delta_s   H[3,3] = 2x - omega_split   H[4,4] = H[3,3] + Delta_c
    H[0,2] = Omega_s       H[3,4] = Omega_c

The s-field partner sits Delta_s below level 2 (pushing 2 up by roughly
Omega_s^2/Delta_s) and the c-field partner Delta_c above level 3. This is the
orientation in which the effective-ladder formula holds literally with the
probe-detuning sign it is written in. Couplings are the matrix elements
themselves, so the second-order shift is Omega^2/Delta.

Decay model: population channels 2->1, 3->2 (radiative), 0->1 and 4->1
(crystal-field relaxation), an incoherent pump 1->2, and per-level pure
dephasing chosen so the 1-2, 2-3 and 2-4 coherences decay at exactly their
target rates. Levels 0 and 2 carry no dephasing of their own, so level 0
(the partner of 2) sees nearly the same coherence rates towards 1, 3 and 4
as level 2 does.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .atomic import MHz, FiveLevelSystem, MediumParams, SusceptibilitySample
from .errors import DegenerateSteadyStateError, InfeasibleMatchError, ParameterError

N_LEVELS = 5
DIPOLE_PAIRS = ((0, 2), (1, 2), (2, 3), (3, 4))
_TRACE_INDEX = [i * N_LEVELS + i for i in range(N_LEVELS)]


@dataclass(frozen=True)
class LevelScheme:
    gamma_21: float
    gamma_32: float
    gamma_42: float
    gamma_rad_21: float
    gamma_rad_32: float
    omega_split: float
    relax_0: float = 1.0 * MHz
    relax_4: float = 1.0 * MHz
    upper_probe: bool = True  # False drops the probe's 2-3 coupling (two-level reduction)

    @property
    def upper_dipole_ratio(self) -> float:
        """Probe matrix element on 2-3 relative to 1-2."""
        if not self.upper_probe:
            return 0.0
        return math.sqrt(self.gamma_rad_32 / self.gamma_rad_21)

    def population_rates(self, pump_rate: float = 0.0) -> np.ndarray:
        """G[i, j] is the incoherent transfer rate j -> i."""
        G = np.zeros((N_LEVELS, N_LEVELS))
        G[1, 2] = self.gamma_rad_21
        G[2, 3] = self.gamma_rad_32
        G[1, 0] = self.relax_0
        G[1, 4] = self.relax_4
        G[2, 1] = pump_rate
        return G

    def coherence_targets(self) -> dict:
        return {(1, 2): self.gamma_21, (2, 3): self.gamma_32, (2, 4): self.gamma_42}

    def level_dephasing(self, pump_rate: float = 0.0) -> np.ndarray:
        """Rates k_i of the dephasing operators sqrt(2 k_i)|i><i|.

        Levels 0 and 2 carry none, so each target coherence 2-j takes its whole
        pure-dephasing part from level j. Per-level operators keep the
        generator completely positive, which arbitrary per-pair rates do not.
        """
        out = self.population_rates(pump_rate).sum(axis=0)
        k = np.zeros(N_LEVELS)
        for (i, j), target in self.coherence_targets().items():
            other = j if i == 2 else i
            pure = target - 0.5 * (out[i] + out[j])
            if pure < 0:
                raise ParameterError(
                    f"coherence {i}-{j}: target {target:g} Hz is below its lifetime limit "
                    f"{0.5 * (out[i] + out[j]):g} Hz"
                )
            k[other] = pure
        return k

    def dephasing(self, pump_rate: float = 0.0) -> np.ndarray:
        """Pure-dephasing rate of every coherence, k_i + k_j."""
        k = self.level_dephasing(pump_rate)
        D = k[:, None] + k[None, :]
        np.fill_diagonal(D, 0.0)
        return D

    def coherence_decay(self, pump_rate: float = 0.0) -> np.ndarray:
        """Total decay rate of every coherence rho_ij implied by the model."""
        out = self.population_rates(pump_rate).sum(axis=0)
        total = 0.5 * (out[:, None] + out[None, :]) + self.dephasing(pump_rate)
        np.fill_diagonal(total, 0.0)
        return total

    def max_pump_rate(self) -> float:
        """Largest pump rate that keeps the 1-2 pure dephasing non-negative."""
        base = self.population_rates(0.0).sum(axis=0)
        return 2.0 * self.gamma_21 - base[1] - base[2]


@dataclass(frozen=True)
class DriveConfig:
    s_rabi: float = 0.0
    s_detuning: float = 1.0
    c_rabi: float = 0.0
    c_detuning: float = 1.0
    probe_rabi: float = 0.0


@dataclass(frozen=True)
class SteadyState:
    rho: np.ndarray
    residual_norm: float


def hamiltonian(scheme: LevelScheme, drive: DriveConfig, probe_detuning: float = 0.0) -> np.ndarray:
    x = probe_detuning
    H = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    H[2, 2] = x
    H[0, 0] = x - drive.s_detuning
    H[3, 3] = 2.0 * x - scheme.omega_split
    H[4, 4] = H[3, 3] + drive.c_detuning
    H[0, 2] = H[2, 0] = drive.s_rabi
    H[3, 4] = H[4, 3] = drive.c_rabi
    if drive.probe_rabi:
        H += drive.probe_rabi * probe_coupling(scheme)
    return H


def probe_coupling(scheme: LevelScheme) -> np.ndarray:
    """Probe interaction per unit Rabi frequency on the 1-2 transition."""
    V = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    V[1, 2] = V[2, 1] = 1.0
    V[2, 3] = V[3, 2] = scheme.upper_dipole_ratio
    return V


def commutator_superop(H: np.ndarray) -> np.ndarray:
    """Matrix of rho -> -i [H, rho] in the row-major vectorisation."""
    eye = np.eye(H.shape[0])
    return -1j * (np.kron(H, eye) - np.kron(eye, H.T))


def build_liouvillian(
    scheme: LevelScheme,
    drive: DriveConfig,
    probe_detuning: float = 0.0,
    pump_rate: float = 0.0,
) -> np.ndarray:
    n = N_LEVELS
    L = commutator_superop(hamiltonian(scheme, drive, probe_detuning))
    G = scheme.population_rates(pump_rate)
    out = G.sum(axis=0)
    for i in range(n):
        for j in range(n):
            if i != j and G[i, j]:
                L[i * n + i, j * n + j] += G[i, j]
    decay = scheme.coherence_decay(pump_rate)
    for i in range(n):
        L[i * n + i, i * n + i] -= out[i]
        for j in range(n):
            if i != j:
                L[i * n + j, i * n + j] -= decay[i, j]
    return L


def _bordered(L: np.ndarray) -> np.ndarray:
    # the populations' rows of L sum to zero, so one of them can carry the trace condition
    A = L.copy()
    A[0, :] = 0.0
    A[0, _TRACE_INDEX] = 1.0
    return A


def steady_state(L: np.ndarray, check_rank: bool = True) -> SteadyState:
    if check_rank:
        s = np.linalg.svd(L, compute_uv=False)
        if s[-2] <= 1e-12 * s[0]:
            raise DegenerateSteadyStateError(
                f"null space of the generator is more than one-dimensional (s[-2]/s[0]={s[-2] / s[0]:.2e})"
            )
    rhs = np.zeros(L.shape[0], dtype=complex)
    rhs[0] = 1.0
    vec = np.linalg.solve(_bordered(L), rhs)
    rho = vec.reshape(N_LEVELS, N_LEVELS)
    return SteadyState(rho, float(np.linalg.norm(L @ vec)))


def linear_response(L: np.ndarray, rho0: np.ndarray, V: np.ndarray) -> np.ndarray:
    """First-order change of the steady state for H -> H + eps V, per unit eps."""
    src = (1j * (V @ rho0 - rho0 @ V)).reshape(-1)
    src[0] = 0.0  # trace of the correction vanishes
    return np.linalg.solve(_bordered(L), src).reshape(N_LEVELS, N_LEVELS)


def dressed_level2(drive: DriveConfig) -> np.ndarray:
    """Eigenvector of the {0, 2} block that is adiabatically connected to |2>."""
    block = np.array([[-drive.s_detuning, drive.s_rabi], [drive.s_rabi, 0.0]])
    _, vecs = np.linalg.eigh(block)
    k = int(np.argmax(np.abs(vecs[1])))
    u = np.zeros(N_LEVELS)
    u[[0, 2]] = vecs[:, k]
    return u


def inversion(rho: np.ndarray, drive: DriveConfig) -> float:
    """(P_2'' - rho_11) / P_2'' with P_2'' the population of the dressed level 2."""
    u = dressed_level2(drive)
    p2 = float(np.real(u @ rho @ u))
    return (p2 - float(rho[1, 1].real)) / p2


def calibrate_pump(scheme: LevelScheme, drive: DriveConfig, pump_p: float) -> float:
    """Pump rate that holds the dressed inversion at ``pump_p`` with the controls on."""
    lo = scheme.gamma_rad_21 * (1.0 + 1e-12)
    hi = scheme.max_pump_rate() * (1.0 - 1e-9)

    def f(rate):
        return inversion(steady_state(build_liouvillian(scheme, drive, 0.0, rate), False).rho, drive) - pump_p

    if f(hi) < 0:
        raise InfeasibleMatchError(
            f"pump: inversion p={pump_p} unreachable below the dephasing-limited rate {hi:g} Hz"
        )
    if f(lo) >= 0:
        return lo
    return brentq(f, lo, hi, xtol=1e-12 * lo, rtol=4 * np.finfo(float).eps, maxiter=200)


@dataclass(frozen=True)
class ProbeScan:
    detunings: np.ndarray
    chi: np.ndarray
    position: float | None = None
    pump_rate: float = 0.0
    warnings: tuple = ()

    @property
    def samples(self) -> list[SusceptibilitySample]:
        return [SusceptibilitySample(float(d), complex(c), self.position) for d, c in zip(self.detunings, self.chi)]


@dataclass(frozen=True)
class LiouvilleModel:
    """Calibrated five-level model at one drive configuration.

    The unperturbed steady state does not depend on the probe detuning
    (level 1 is not coherently coupled to anything without the probe), so
    the pump calibration and rho0 are computed once.
    """

    scheme: LevelScheme
    drive: DriveConfig
    medium: MediumParams
    pump_p: float
    pump_rate: float = field(init=False)
    rho0: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        # the probe enters only through chi_linear / chi_finite
        object.__setattr__(self, "drive", replace(self.drive, probe_rabi=0.0))
        rate = calibrate_pump(self.scheme, self.drive, self.pump_p)
        ss = steady_state(build_liouvillian(self.scheme, self.drive, 0.0, rate))
        object.__setattr__(self, "pump_rate", rate)
        object.__setattr__(self, "rho0", ss.rho)

    def _chi_from_coherences(self, rho1: np.ndarray) -> complex:
        ratio = self.scheme.upper_dipole_ratio
        return -self.medium.prefactor * self.scheme.gamma_rad_21 * (rho1[2, 1] + ratio * rho1[3, 2])

    def chi_linear(self, probe_detuning: float) -> complex:
        L = build_liouvillian(self.scheme, self.drive, probe_detuning, self.pump_rate)
        return self._chi_from_coherences(linear_response(L, self.rho0, probe_coupling(self.scheme)))

    def chi_finite(self, probe_detuning: float, probe_rabi: float) -> complex:
        """Probe included in H at finite Rabi frequency; Richardson step h, h/2."""

        def at(h):
            drive = replace(self.drive, probe_rabi=h)
            L = build_liouvillian(self.scheme, drive, probe_detuning, self.pump_rate)
            return self._chi_from_coherences(steady_state(L, False).rho / h)

        return (4.0 * at(probe_rabi / 2) - at(probe_rabi)) / 3.0

    def saturation_parameter(self, probe_rabi: float) -> float:
        """Resonant probe-induced 1-2 transfer rate over the 1-2 population exchange rate."""
        rates = self.scheme.population_rates(self.pump_rate)
        return 4.0 * probe_rabi**2 / (self.scheme.gamma_21 * (rates[1, 2] + rates[2, 1]))


def probe_susceptibility(
    scheme: LevelScheme,
    drive: DriveConfig,
    dp_grid,
    pump_p: float,
    medium: MediumParams,
    mode: str = "linear",
    position: float | None = None,
    model: LiouvilleModel | None = None,
) -> ProbeScan:
    """chi(delta_p) of the driven five-level atom.

    ``mode='linear'`` is first-order perturbation theory in the probe;
    ``mode='finite'`` solves the full steady state at ``drive.probe_rabi``.
    """
    model = model or LiouvilleModel(scheme, drive, medium, pump_p)
    dp = np.asarray(dp_grid, dtype=float)
    notes = []
    weak = 0.1 * min(scheme.gamma_21, scheme.gamma_32)
    if mode == "linear":
        if drive.probe_rabi and abs(drive.probe_rabi) >= weak:
            notes.append(
                f"probe Rabi frequency {drive.probe_rabi:g} Hz is not weak (>= {weak:g} Hz); "
                "linear response ignores saturation"
            )
        chi = np.array([model.chi_linear(d) for d in dp])
    elif mode == "finite":
        if not drive.probe_rabi:
            raise ParameterError("finite mode needs drive.probe_rabi > 0")
        sat = model.saturation_parameter(drive.probe_rabi)
        if sat > 0.1:
            notes.append(f"probe saturation parameter {sat:.3g} > 0.1; finite-difference chi is not linear")
        chi = np.array([model.chi_finite(d, drive.probe_rabi) for d in dp])
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    for msg in notes:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return ProbeScan(dp, chi, position, model.pump_rate, tuple(notes))


def scheme_from_system(sys: FiveLevelSystem, relax_0: float = 1.0 * MHz, relax_4: float = 1.0 * MHz) -> LevelScheme:
    return LevelScheme(
        gamma_21=sys.t21.gamma,
        gamma_32=sys.t32.gamma,
        gamma_42=sys.gamma_42,
        gamma_rad_21=sys.t21.gamma_rad,
        gamma_rad_32=sys.t32.gamma_rad,
        omega_split=sys.omega_split,
        relax_0=relax_0,
        relax_4=relax_4,
    )


def drive_at(sys: FiveLevelSystem, z: float = 0.0) -> DriveConfig:
    """Controls at position z; the s field is a standing wave Omega_s cos(k_s z)."""
    k_s = 2.0 * math.pi / sys.modulation_wavelength
    return DriveConfig(
        s_rabi=sys.s_field.rabi * math.cos(k_s * z),
        s_detuning=sys.s_field.detuning,
        c_rabi=sys.c_field.rabi,
        c_detuning=sys.c_field.detuning,
    )


def model_at(sys: FiveLevelSystem, z: float = 0.0, **scheme_kw) -> LiouvilleModel:
    return LiouvilleModel(scheme_from_system(sys, **scheme_kw), drive_at(sys, z), sys.medium, sys.pump_p)


def central_window(sys: FiveLevelSystem, n_points: int = 61, half_width: float = 3.0) -> np.ndarray:
    """Probe detunings within ``half_width`` linewidths of the transparency point."""
    g = sys.t21.gamma
    return sys.transparency_detuning + np.linspace(-half_width * g, half_width * g, n_points)


def _sup_ratio(a: np.ndarray, ref: np.ndarray) -> float:
    return float(np.max(np.abs(a - ref)) / np.max(np.abs(ref)))


@dataclass(frozen=True)
class OracleComparison:
    detunings: np.ndarray
    chi_model: np.ndarray
    chi_oracle: np.ndarray

    @property
    def deviation(self) -> float:
        """sup |chi_oracle - chi_model| / sup |chi_model|."""
        return _sup_ratio(self.chi_oracle, self.chi_model)


def compare_effective(sys: FiveLevelSystem, dp_grid=None, z: float = 0.0, **scheme_kw) -> OracleComparison:
    """Master-equation chi against the effective-ladder formula at position z."""
    from .atomic import ProbeField, chi_effective, delta_of_z, ControlField

    dp = central_window(sys) if dp_grid is None else np.asarray(dp_grid, dtype=float)
    s = sys.s_field
    local = 0.0
    if s.rabi:
        local = delta_of_z(ControlField(s.rabi, s.detuning, sys.modulation_wavelength), z)
    model = np.array([chi_effective(sys, ProbeField(d), local) for d in dp])
    oracle = probe_susceptibility(scheme_from_system(sys, **scheme_kw), drive_at(sys, z), dp,
                                  sys.pump_p, sys.medium).chi
    return OracleComparison(dp, model, oracle)


def compare_two_level(sys: FiveLevelSystem, dp_grid=None, probe_rabi: float | None = None) -> OracleComparison:
    """Drives off, probe on 1-2 only, against the lower-transition Lorentzian."""
    from .atomic import TwoLevelTransition, chi_ladder

    g = sys.t21.gamma
    dp = np.linspace(-3 * g, 3 * g, 61) if dp_grid is None else np.asarray(dp_grid, dtype=float)
    scheme = LevelScheme(g, sys.t32.gamma, sys.gamma_42, sys.t21.gamma_rad, sys.t32.gamma_rad,
                         sys.omega_split, upper_probe=False)
    drive = DriveConfig(probe_rabi=1e-3 * g if probe_rabi is None else probe_rabi)
    oracle = probe_susceptibility(scheme, drive, dp, sys.pump_p, sys.medium).chi
    f21 = sys.t21.frequency
    lower = TwoLevelTransition(f21, sys.t21.gamma_rad, g, sys.rho_1, sys.rho_2)
    upper = TwoLevelTransition(f21, 0.0, sys.t32.gamma, sys.rho_2, 0.0)
    model = chi_ladder(lower, upper, sys.medium, f21 - dp)
    return OracleComparison(dp, np.asarray(model), oracle)


def compare_bare_ladder(sys: FiveLevelSystem, dp_grid=None) -> OracleComparison:
    """Both controls off, probe on 1-2 and 2-3, against the two-Lorentzian ladder."""
    from .atomic import TwoLevelTransition, chi_ladder

    g = sys.t21.gamma
    dp = np.linspace(-3 * g, 3 * g, 61) if dp_grid is None else np.asarray(dp_grid, dtype=float)
    scheme = scheme_from_system(sys)
    oracle = probe_susceptibility(scheme, DriveConfig(), dp, sys.pump_p, sys.medium).chi
    model = chi_ladder(sys.t21, sys.t32, sys.medium, sys.t21.frequency - dp)
    return OracleComparison(dp, np.asarray(model), oracle)
