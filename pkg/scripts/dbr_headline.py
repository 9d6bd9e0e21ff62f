"""Coupling strength, peak reflectance and bandwidth of the induced Bragg grating."""

import argparse
import math

import numpy as np

from starkbragg.config import load_preset
from starkbragg.structure import (
    Grid1D,
    bragg_period,
    build_profile,
    coupling_constant,
    figure_data,
    period_counts,
    probe_wavelength,
    spectrum,
)


def report(sys_, label: str, periods: int, per_period: int, points: int):
    per = bragg_period(sys_.medium.lambda_medium).period
    grid = Grid1D.periodic(per, periods, per_period)
    dp = sys_.transparency_detuning
    kl = coupling_constant(build_profile(sys_, grid, dp), per, probe_wavelength(sys_, dp)) * grid.length
    g = sys_.t21.gamma
    off = np.linspace(-3 * g, 3 * g, points)
    sp = spectrum(sys_, grid, off)
    lossless = spectrum(sys_, grid, off, lossless=True)
    k0 = int(np.argmin(np.abs(off)))
    ptp = figure_data("5", sys_, periods=1, per_period=200).meta["peak_to_peak_chi_re"]
    print(f"{label:9s} N={periods:4d} L={grid.length * 1e6:6.1f} um  dchi'={ptp:.4f}  kL={kl:.3f}  "
          f"tanh^2(kL)={math.tanh(kl) ** 2:.4f}  R(0)={sp.R[k0]:.4f}  R_peak={sp.R_peak:.4f}"
          f"@{sp.peak_detuning / 1e9:+.3f}GHz  FWHM={sp.fwhm() / 1e9:.3f}GHz  "
          f"lossless FWHM={lossless.fwhm() / 1e9:.3f}GHz")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="er_yag")
    ap.add_argument("--grid-per-period", type=int, default=40)
    ap.add_argument("--points", type=int, default=241)
    args = ap.parse_args()
    preset = load_preset(args.preset)
    counts = period_counts(100e-6, preset.medium)
    print(f"periods in 100 um: {counts['medium_wavelength']:.1f} (in-medium wavelength), "
          f"{counts['vacuum_wavelength']:.1f} (vacuum wavelength)")
    for overrides, label in ((False, "formula"), (True, "quoted")):
        sys_ = preset.system(overrides)
        for n in (245, int(counts["medium_wavelength"])):
            report(sys_, label, n, args.grid_per_period, args.points)
