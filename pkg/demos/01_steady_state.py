"""Steady state of a driven cavity filled with a far-detuned two-level medium.

Walks through the susceptibilities of the default medium, the intensity
response to the drive (including the bistable window) and the transmitted
power fraction.  Writes ``steady_state.svg`` into the output directory.
"""
# %%
import sys
from pathlib import Path

import numpy as np

from chi3 import export
from chi3.params import MediumParams, Susceptibilities, susceptibilities, transparent
from chi3.semiclassical import power_ratio, steady_state

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# %% The medium: linear and cubic susceptibilities
p = MediumParams()
s = susceptibilities(p)
print(f"detuning ratio x = {p.x:g}")
print(f"linear  kappa1 = {s.kappa1:.5g}, kappa2 = {s.kappa2:.3g}")
print(f"cubic   chi1   = {s.chi1:.3g}, chi2   = {s.chi2:.3g}, beta = {s.beta:.3g}")
s = transparent(s)

# %% Ramp the drive.  The stable branch reached from below is `reachable`.
a0 = np.linspace(0.1, 40, 200)
U = np.array([steady_state(p.replace(a0=a), s).U for a in a0])
print(f"beta*U at the largest drive: {s.beta * U[-1]:.3f}")

# %% A strongly dispersive toy medium shows three roots in a window of drives
toy = Susceptibilities(linear=3.0 + 0j, cubic=0.05 + 0j, beta=0.05 / 3)
drives = np.linspace(0.5, 14, 300)
roots = [steady_state(p.replace(a0=a), toy, all_roots=True) for a in drives]
# Ramping the drive up follows the smallest root, ramping it down the largest;
# between the two jumps the cavity is bistable.
branches = {"ramp up": [r[0].U for r in roots], "ramp down": [r[-1].U for r in roots]}
bistable = drives[[len(r) == 3 for r in roots]]
print(f"bistable for a0 in [{bistable.min():.2f}, {bistable.max():.2f}]")

export.write_svg(out / "steady_state.svg", drives, branches, xlabel="a0", ylabel="U",
                 title="toy Kerr medium: intracavity intensity", reference=None)

# %% Transmission through the two mirrors
for t in (0.0, 0.5, 2.0):
    print(f"t = {t}: P_out/P_in = {power_ratio(t, p.eps):.3f}")
