"""Command-line front end: matching, figures, spectra and oracle validation."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import Preset, builtin_names, load_preset
from .errors import StarkBraggError
from .matching import imaginary_residual, solve_all
from .structure import (
    Grid1D,
    bragg_period,
    coupling_constant,
    build_profile,
    figure_data,
    period_counts,
    probe_wavelength,
    spectrum,
)

VALIDATE_THRESHOLD = 0.05
REDUCTION_THRESHOLD = 1e-3


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _dump_json(path: Path, payload: dict):
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, columns, data: np.ndarray):
    data = np.atleast_2d(np.asarray(data, dtype=float))
    lines = [",".join(columns)]
    lines += [",".join(f"{v:.17e}" for v in row) for row in data]
    path.write_text("\n".join(lines) + "\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Run:
    """Collects emitted files and writes the manifest."""

    def __init__(self, args, preset: Preset, tag: str):
        self.args = args
        self.preset = preset
        self.tag = tag
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list[Path] = []
        self.sol = preset.solution(args.use_overrides)

    @property
    def stem(self) -> str:
        suffix = "_override" if self.args.use_overrides else ""
        return f"{self.tag}_{self.preset.name}{suffix}"

    def csv(self, columns, data):
        path = self.out / f"{self.stem}.csv"
        _write_csv(path, columns, data)
        self.files.append(path)

    def table(self, columns, rows):
        path = self.out / f"{self.stem}.csv"
        lines = [",".join(columns)] + [",".join(f"{v:.17e}" if isinstance(v, float) else str(v) for v in r) for r in rows]
        path.write_text("\n".join(lines) + "\n")
        self.files.append(path)

    def json(self, payload: dict):
        path = self.out / f"{self.stem}.json"
        _dump_json(path, payload)
        self.files.append(path)

    def manifest(self, settings: dict):
        _dump_json(self.out / "manifest.json", {
            "tool": "starkbragg",
            "version": __version__,
            "command": self.tag,
            "preset": self.preset.snapshot(),
            "solution_source": self.sol.source,
            "resolved": self.sol.as_dict(),
            "settings": settings,
            "files": {p.name: _sha256(p) for p in self.files},
        })


def _grid_settings(args, preset: Preset) -> dict:
    per = args.grid_per_period if args.grid_per_period is not None else preset.grid_per_period
    return {"grid_per_period": per}


def cmd_match(args) -> int:
    preset = load_preset(args.preset)
    run = Run(args, preset, "match")
    formula = solve_all(preset.match)
    sol = run.sol
    sys_sel = preset.system(args.use_overrides)
    report = {
        "solution": sol.as_dict(),
        "formula_solution": formula.as_dict(),
        "c_far_detuning_ratio": sol.c_far_detuning_ratio,
        "s_far_detuning_ratio": sol.s_far_detuning_ratio(preset.match.delta_s),
        "imaginary_residual": imaginary_residual(sys_sel),
        "linewidth_identity_residual": (
            preset.match.gamma_42 * (1 - formula.xi) + preset.match.gamma_32 * formula.xi - preset.match.gamma_21
        ) / preset.match.gamma_21,
    }
    if preset.overrides:
        report["override_vs_formula"] = {
            k: {"override": v, "formula": getattr(formula, k),
                "relative_difference": (v - getattr(formula, k)) / getattr(formula, k)}
            for k, v in sorted(preset.overrides.items())
        }
        if not args.use_overrides:
            report["override_imaginary_residual"] = imaginary_residual(preset.system(True))
    names = ("xi", "pump_p", "delta_c", "omega_c", "omega_s", "delta_p")
    units = ("1", "1", "Hz", "Hz", "Hz", "Hz")
    run.table(("quantity", "value", "unit"), [(n, float(getattr(sol, n)), u) for n, u in zip(names, units)])
    run.json(report)
    run.manifest({})
    for n in names:
        print(f"{n:8s} {getattr(sol, n): .6g}")
    print(f"Im-chi residual {report['imaginary_residual']:.3e} ({sol.source})")
    return 0


def cmd_figure(args) -> int:
    preset = load_preset(args.preset)
    run = Run(args, preset, f"figure{args.id}")
    settings = _grid_settings(args, preset)
    table = figure_data(args.id, preset.system(args.use_overrides), per_period=settings["grid_per_period"])
    run.csv(table.columns, table.data)
    run.json({"figure": table.name, "columns": list(table.columns), "units": _figure_units(table.columns),
              "meta": table.meta})
    run.manifest(settings)
    print(f"{table.name}: {len(table.data)} rows -> {run.out / (run.stem + '.csv')}")
    return 0


def _figure_units(columns) -> dict:
    return {c: ("Hz" if c.endswith("_hz") else "m" if c.endswith("_m") else "1") for c in columns}


def _structure_grid(preset: Preset, sys_, per_period: int) -> Grid1D:
    period = bragg_period(sys_.medium.lambda_medium).period
    return Grid1D.periodic(period, preset.structure_periods(period), per_period)


def cmd_spectrum(args) -> int:
    preset = load_preset(args.preset)
    run = Run(args, preset, "spectrum")
    settings = _grid_settings(args, preset)
    sys_ = preset.system(args.use_overrides)
    g = sys_.t21.gamma
    lo = -3 * g if args.dp_min is None else args.dp_min * 1e9
    hi = 3 * g if args.dp_max is None else args.dp_max * 1e9
    offsets = np.linspace(lo, hi, args.dp_points)
    grid = _structure_grid(preset, sys_, settings["grid_per_period"])
    sp = spectrum(sys_, grid, offsets, lossless=args.lossless, chi_source=args.source)
    unit = np.abs(1.0 - sp.R - sp.T)
    run.csv(("detuning_hz", "R", "T", "A", "abs_1_minus_R_minus_T"), np.column_stack([sp.detunings, sp.R, sp.T, sp.A, unit]))
    period = bragg_period(sys_.medium.lambda_medium).period
    prof = build_profile(sys_, grid, sys_.transparency_detuning)
    kappa = coupling_constant(prof, period, probe_wavelength(sys_, sys_.transparency_detuning))
    k0 = int(np.argmin(np.abs(sp.detunings)))
    run.json({
        "R_peak": sp.R_peak,
        "peak_detuning_hz": sp.peak_detuning,
        "bandwidth_fwhm_hz": sp.fwhm(),
        "R_at_transparency": float(sp.R[k0]),
        "transparency_detuning_hz": sp.transparency,
        "coupling_kappa_per_m": kappa,
        "kappa_L": kappa * grid.length,
        "length_m": grid.length,
        "n_periods": preset.structure_periods(period),
        "period_counts_100um": period_counts(100e-6, sys_.medium),
        "max_unitarity_defect": float(unit.max()),
        "lossless": bool(args.lossless),
        "chi_source": args.source,
        "units": {"detuning_hz": "Hz, probe detuning from the transparency point"},
    })
    # the thread count cannot change results, so it stays out of the manifest
    settings.update({"dp_min_hz": lo, "dp_max_hz": hi, "dp_points": args.dp_points, "lossless": bool(args.lossless),
                     "chi_source": args.source})
    run.manifest(settings)
    print(f"R_peak {sp.R_peak:.6f} at {sp.peak_detuning / 1e9:+.4f} GHz, FWHM {sp.fwhm() / 1e9:.4f} GHz, "
          f"R(transparency) {sp.R[k0]:.6f}")
    return 0


def cmd_validate(args) -> int:
    from .liouville import central_window, compare_bare_ladder, compare_effective, compare_two_level

    preset = load_preset(args.preset)
    run = Run(args, preset, "validate")
    sys_ = preset.system(args.use_overrides)
    kw = {"relax_0": preset.relax_0, "relax_4": preset.relax_4}
    main = compare_effective(sys_, central_window(sys_, args.points), **kw)
    two = compare_two_level(sys_)
    bare = compare_bare_ladder(sys_)
    checks = {
        "effective_formula": (main.deviation, VALIDATE_THRESHOLD),
        "two_level_reduction": (two.deviation, REDUCTION_THRESHOLD),
        "controls_off_ladder": (bare.deviation, REDUCTION_THRESHOLD),
    }
    run.csv(("detuning_hz", "chi_formula_re", "chi_formula_im", "chi_master_re", "chi_master_im"),
            np.column_stack([main.detunings, main.chi_model.real, main.chi_model.imag,
                             main.chi_oracle.real, main.chi_oracle.imag]))
    run.json({name: {"deviation": d, "threshold": t, "pass": d <= t} for name, (d, t) in checks.items()})
    run.manifest({"points": args.points, **kw})
    ok = True
    for name, (d, t) in checks.items():
        verdict = "PASS" if d <= t else "FAIL"
        ok &= d <= t
        print(f"{verdict} {name}: deviation {d:.3e} (threshold {t:g})")
    return 0 if ok else 1


def cmd_preset_list(args) -> int:
    for name in builtin_names():
        p = load_preset(name)
        print(f"{name:18s} {p.description}")
    return 0


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--preset", default="er_yag", help="builtin preset name or path to a .cfg file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--grid-per-period", type=int, default=None,
                   help="layers per modulation period (default: preset value, 40)")
    p.add_argument("--use-paper-overrides", dest="use_overrides", action="store_true",
                   help="use the preset's override.* values instead of the closed-form matching")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="starkbragg", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("match", help="solve the matching conditions")
    _add_common(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("figure", help="emit figure data")
    p.add_argument("id", choices=["1", "2", "3", "5"])
    _add_common(p)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("spectrum", help="reflectance spectrum of the induced grating")
    _add_common(p)
    p.add_argument("--lossless", action="store_true", help="force kappa = 0")
    p.add_argument("--dp-min", type=float, default=None, help="GHz from transparency (default -3 gamma_21)")
    p.add_argument("--dp-max", type=float, default=None, help="GHz from transparency (default +3 gamma_21)")
    p.add_argument("--dp-points", type=int, default=241)
    p.add_argument("--source", choices=["analytic", "liouville"], default="analytic")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("validate", help="master-equation check of the effective formula")
    _add_common(p)
    p.add_argument("--points", type=int, default=61, help="detunings in the central window (<= 1000)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("preset", help="preset utilities")
    psub = p.add_subparsers(dest="preset_command", required=True)
    pl = psub.add_parser("list", help="list builtin presets")
    pl.set_defaults(func=cmd_preset_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "grid_per_period", None) is not None and args.grid_per_period < 1:
        print("error: --grid-per-period must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except StarkBraggError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
