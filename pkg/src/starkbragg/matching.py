"""Parameter matching that turns the five-level scheme into a zero-absorption ladder."""

from __future__ import annotations

import math
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
)
from .errors import InfeasibleMatchError


@dataclass(frozen=True)
class MatchInput:
    gamma_21: float
    gamma_32: float
    gamma_42: float
    gamma_rad_21: float
    gamma_rad_32: float
    omega_split: float
    delta_s: float

    def check(self):
        if not self.gamma_42 > 0:
            raise InfeasibleMatchError("linewidth matching: requires gamma_42 > 0")
        if not self.gamma_21 > self.gamma_42:
            raise InfeasibleMatchError("linewidth matching: requires gamma_21 > gamma_42 (else xi <= 0)")
        if not self.gamma_32 > self.gamma_21:
            raise InfeasibleMatchError("linewidth matching: requires gamma_32 > gamma_21 (else xi >= 1)")
        if not self.delta_s > 0:
            raise InfeasibleMatchError("omega_s condition: requires delta_s > 0")


@dataclass(frozen=True)
class MatchSolution:
    xi: float
    pump_p: float
    delta_c: float
    omega_c: float
    omega_s: float
    delta_p: float
    source: str = "formula"

    @property
    def c_far_detuning_ratio(self) -> float:
        return self.delta_c / self.omega_c

    def s_far_detuning_ratio(self, delta_s: float) -> float:
        return delta_s / self.omega_s

    def as_dict(self) -> dict:
        return {
            "xi": self.xi,
            "pump_p": self.pump_p,
            "delta_c_hz": self.delta_c,
            "omega_c_hz": self.omega_c,
            "omega_s_hz": self.omega_s,
            "delta_p_hz": self.delta_p,
            "source": self.source,
        }


def solve_xi(inp: MatchInput) -> float:
    """Control parameter that equalises the effective upper and lower linewidths."""
    inp.check()
    return (inp.gamma_21 - inp.gamma_42) / (inp.gamma_32 - inp.gamma_42)


def solve_pump(inp: MatchInput, xi: float) -> float:
    """Pump parameter that matches the two transition amplitudes."""
    if not 0.0 < xi < 1.0:
        raise InfeasibleMatchError(f"amplitude matching: xi must lie in (0, 1), got {xi}")
    if not inp.gamma_rad_21 > 0:
        raise InfeasibleMatchError("amplitude matching: requires gamma_rad_21 > 0")
    p = inp.gamma_rad_32 / inp.gamma_rad_21 * xi / (1.0 + 2.0 * xi)
    if not p > 0:
        raise InfeasibleMatchError(f"amplitude matching: pump parameter p={p} must be > 0 (gamma_rad_32 > 0)")
    if p >= 1:
        raise InfeasibleMatchError(f"amplitude matching: pump parameter p={p} must be < 1 (full inversion)")
    return p


def solve_delta_c(inp: MatchInput, xi: float) -> tuple[float, float]:
    """c-field detuning and Rabi frequency that overlap the two dressed lines."""
    delta_c = (inp.omega_split + 2.0 * inp.gamma_21) / (1.0 + xi - xi**2)
    return delta_c, math.sqrt(xi) * abs(delta_c)


def solve_all(inp: MatchInput) -> MatchSolution:
    xi = solve_xi(inp)
    p = solve_pump(inp, xi)
    delta_c, omega_c = solve_delta_c(inp, xi)
    omega_s = math.sqrt(2.0 * inp.gamma_21 * inp.delta_s)
    delta_p = -(omega_s**2) / (2.0 * inp.delta_s)
    return MatchSolution(xi, p, delta_c, omega_c, omega_s, delta_p)


def check_amplitude_match(t21: TwoLevelTransition, t32: TwoLevelTransition) -> float:
    """gamma_rad_21 (rho_1 - rho_2) + gamma_rad_32 (rho_2 - rho_3); zero when matched."""
    return t21.gamma_rad * t21.population_difference + t32.gamma_rad * t32.population_difference


def build_system(
    inp: MatchInput,
    sol: MatchSolution,
    medium: MediumParams,
    frequency_21: float | None = None,
) -> FiveLevelSystem:
    """Assemble the five-level system for a solution (formula or override)."""
    f21 = C_LIGHT / medium.lambda_vac if frequency_21 is None else frequency_21
    rho2 = 1.0 / (2.0 - sol.pump_p)
    t21 = TwoLevelTransition(f21, inp.gamma_rad_21, inp.gamma_21, 1.0 - rho2, rho2)
    # omega_split is counted so that the bare 2-3 line sits omega_split below the 1-2 line
    t32 = TwoLevelTransition(f21 - inp.omega_split, inp.gamma_rad_32, inp.gamma_32, rho2, 0.0)
    return FiveLevelSystem(
        t21=t21,
        t32=t32,
        omega_split=inp.omega_split,
        gamma_42=inp.gamma_42,
        pump_p=sol.pump_p,
        s_field=ControlField(sol.omega_s, inp.delta_s, medium.lambda_medium),
        c_field=ControlField(sol.omega_c, sol.delta_c),
        medium=medium,
    )


def imaginary_residual(sys: FiveLevelSystem, n_delta: int = 201) -> float:
    """max|Im chi| / max|Re chi| over local offsets in [-gamma_21, gamma_21] at transparency."""
    g = sys.t21.gamma
    deltas = np.linspace(-g, g, n_delta)
    chi = chi_effective(sys, ProbeField(sys.transparency_detuning), deltas)
    return float(np.max(np.abs(chi.imag)) / np.max(np.abs(chi.real)))
