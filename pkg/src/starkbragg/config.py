"""Preset files: flat ``key = value [unit]`` text with ``#`` comments."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

from .atomic import FiveLevelSystem, MediumParams
from .errors import ConfigError, StarkBraggError
from .matching import MatchInput, MatchSolution, build_system, solve_all

UNITS = {
    "": 1.0,
    "hz": 1.0,
    "khz": 1e3,
    "mhz": 1e6,
    "ghz": 1e9,
    "thz": 1e12,
    "m": 1.0,
    "mm": 1e-3,
    "um": 1e-6,
    "nm": 1e-9,
    "m^-3": 1.0,
    "cm^-3": 1e6,
}

_FLOAT_KEYS = {
    "density", "lambda_vac", "n_background",
    "gamma_21", "gamma_32", "gamma_42", "gamma_rad_21", "gamma_rad_32",
    "omega_split", "delta_s", "length", "relax_0", "relax_4",
}
_INT_KEYS = {"n_periods", "grid_per_period", "modulation"}
_STR_KEYS = {"name", "description"}
_OVERRIDE_KEYS = {"pump_p", "omega_s", "omega_c", "delta_c"}
_REQUIRED = {
    "density", "lambda_vac", "n_background", "gamma_21", "gamma_32", "gamma_42",
    "gamma_rad_21", "gamma_rad_32", "omega_split", "delta_s",
}


@dataclass(frozen=True)
class Preset:
    name: str
    medium: MediumParams
    match: MatchInput
    overrides: dict = field(default_factory=dict)
    length: float = 100e-6
    n_periods: int | None = None
    grid_per_period: int = 40
    relax_0: float = 1e6
    relax_4: float = 1e6
    modulation: int = 1
    description: str = ""

    def solution(self, use_overrides: bool = False) -> MatchSolution:
        """Matching solution from the closed-form chain, optionally replaced by the stored overrides."""
        sol = solve_all(self.match)
        if not use_overrides:
            return sol
        if not self.overrides:
            raise ConfigError(f"preset {self.name!r} has no override values")
        ov = self.overrides
        p = ov.get("pump_p", sol.pump_p)
        omega_s = ov.get("omega_s", sol.omega_s)
        omega_c = ov.get("omega_c", sol.omega_c)
        delta_c = ov.get("delta_c", sol.delta_c)
        xi = (omega_c / delta_c) ** 2
        delta_p = -omega_s**2 / (2.0 * self.match.delta_s)
        return MatchSolution(xi, p, delta_c, omega_c, omega_s, delta_p, source="override")

    def system(self, use_overrides: bool = False) -> FiveLevelSystem:
        sys = build_system(self.match, self.solution(use_overrides), self.medium)
        if not self.modulation:
            sys = replace(sys, s_field=replace(sys.s_field, rabi=0.0))
        return sys

    def structure_periods(self, period: float) -> int:
        """Number of modulation periods in the structure."""
        if self.n_periods is not None:
            return self.n_periods
        return int(math.floor(self.length / period + 1e-9))

    def snapshot(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "medium": asdict(self.medium),
            "match": asdict(self.match),
            "overrides": dict(sorted(self.overrides.items())),
            "length_m": self.length,
            "n_periods": self.n_periods,
            "grid_per_period": self.grid_per_period,
            "relax_0_hz": self.relax_0,
            "relax_4_hz": self.relax_4,
            "modulation": self.modulation,
        }


def parse_value(text: str, key: str, lineno: int) -> float:
    parts = text.split()
    if not parts or len(parts) > 2:
        raise ConfigError(f"line {lineno}: expected 'value [unit]' for {key!r}, got {text!r}")
    try:
        num = float(parts[0])
    except ValueError:
        raise ConfigError(f"line {lineno}: {key!r} value {parts[0]!r} is not a number") from None
    unit = parts[1].lower() if len(parts) == 2 else ""
    if unit not in UNITS:
        raise ConfigError(f"line {lineno}: unknown unit {parts[1]!r} for {key!r}")
    return num * UNITS[unit]


def parse_preset(text: str, default_name: str = "custom") -> Preset:
    vals: dict = {}
    overrides: dict = {}
    seen: set = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        if key.startswith("override."):
            sub = key.split(".", 1)[1]
            if sub not in _OVERRIDE_KEYS:
                raise ConfigError(f"line {lineno}: unknown override {sub!r}")
            overrides[sub] = parse_value(value, key, lineno)
        elif key in _FLOAT_KEYS:
            vals[key] = parse_value(value, key, lineno)
        elif key in _INT_KEYS:
            try:
                vals[key] = int(value)
            except ValueError:
                raise ConfigError(f"line {lineno}: {key!r} must be an integer") from None
        elif key in _STR_KEYS:
            vals[key] = value
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    missing = sorted(_REQUIRED - vals.keys())
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    try:
        medium = MediumParams(vals["density"], vals["lambda_vac"], vals["n_background"])
        match = MatchInput(
            vals["gamma_21"], vals["gamma_32"], vals["gamma_42"],
            vals["gamma_rad_21"], vals["gamma_rad_32"], vals["omega_split"], vals["delta_s"],
        )
    except StarkBraggError as exc:
        raise ConfigError(str(exc)) from exc
    return Preset(
        name=vals.get("name", default_name),
        medium=medium,
        match=match,
        overrides=overrides,
        length=vals.get("length", 100e-6),
        n_periods=vals.get("n_periods"),
        grid_per_period=vals.get("grid_per_period", 40),
        relax_0=vals.get("relax_0", 1e6),
        relax_4=vals.get("relax_4", 1e6),
        modulation=vals.get("modulation", 1),
        description=vals.get("description", ""),
    )


def builtin_names() -> list[str]:
    root = resources.files("starkbragg") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".cfg"))


def load_preset(name_or_path: str) -> Preset:
    """Load a builtin preset by name, or a preset file by path."""
    path = Path(name_or_path)
    if path.suffix == ".cfg" or path.exists():
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read preset {name_or_path!r}: {exc}") from exc
        return parse_preset(text, path.stem)
    res = resources.files("starkbragg") / "presets" / f"{name_or_path}.cfg"
    if not res.is_file():
        raise ConfigError(f"unknown preset {name_or_path!r}; builtin presets: {', '.join(builtin_names())}")
    return parse_preset(res.read_text(), name_or_path)
