"""Squeezing spectra of the three linearized models at the default operating
point, and the optimal local-oscillator phase.

Compares the effective-Hamiltonian (eha), Haken (hm) and Scully-Lamb (slm)
descriptions, which share the cavity but differ in the noise the medium adds.
"""
# %%
import sys
from pathlib import Path

import numpy as np

from chi3 import export, linearized as lin
from chi3.params import MediumParams, susceptibilities, transparent

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

p = MediumParams(a0=6.0)
s = transparent(susceptibilities(p))
wb = np.linspace(0, 5, 201)

# %% Amplitude and phase quadratures for each model
series = {}
for model in lin.MODELS:
    op = lin.operating_point(model, p, s)
    print(f"{model}: U = {op.U:.1f}, beta U = {s.beta * op.U:.4f}, t = {op.coeffs.t:.3f}, "
          f"stable = {op.dd.is_stable}")
    series[f"{model} phase"] = lin.spectrum_scaled(op.coeffs, p.eps, wb, "phase")
    gm, _ = lin.spectrum_optimal(model, p, s, op.U, p.eps, wb, k=op.k)
    series[f"{model} optimal"] = gm

export.write_svg(out / "spectra.svg", wb, series, ylabel="g",
                 title="phase quadrature and optimal-phase spectra")

# %% Scully-Lamb adds phase noise on top of Haken
hm = series["hm phase"]
slm = series["slm phase"]
print(f"smallest SLM excess over HM: {np.min(slm - hm):.3e}")

# %% Where is the best phase?  Scan Theta at one frequency and compare.
model, w0 = "hm", 1.0
op = lin.operating_point(model, p, s, weak_field=True)
best = lin.optimal_phase(model, p, s, op.U, w0 * p.A, phi0=op.phi0, weak_field=True)
thetas = np.linspace(0, np.pi, 181)
scan = [float(lin.spectrum_g_raw(op.dd, op.U, op.phi0, p.C_out, w0 * p.A, op.phi0 + th))
        for th in thetas]
print(f"optimal Theta - phi0 = {best.theta0 - op.phi0:.4f} rad, g_min = {best.g_min:.4e}; "
      f"scan minimum {min(scan):.4e}")

# %% Photocurrent noise with a realistic detector
eta = 0.8
print(f"photocurrent at the HM optimum (eta = {eta}): "
      f"{float(lin.photocurrent(best.g_min, eta)):.6f} shot-noise units")

# %% The effective-Hamiltonian model at a fixed phase squeezes a whole band
for t in (1.0, 10.0):
    wm, gmin = lin.eha_band_minimum(t)
    print(f"eha, t = {t:>4}: deepest noise reduction {gmin:.4f} at omega_bar = {wm:.3f}")
