"""Light generated in a medium without population inversion.

Photon number, Mandel parameter and linewidth versus the saturation product
beta*q0, then the homodyne spectra when a coherent drive is added.
"""
# %%
import sys
from pathlib import Path

import numpy as np

from chi3 import export, invfree as inv
from chi3.sde import moment_ode_oracle

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# %% Sub-Poissonian statistics appear as saturation sets in
bq = np.logspace(-3, 3, 121)
st = inv.generation_stats(bq, np.ones_like(bq), 1.0)
print(f"beta<n> approaches {st.mean_n[-1]:.4f}")
print(f"xi/<n> drops from {st.mandel_ratio[0]:.4f} to {st.mandel_ratio[-1]:.4f}")
print(f"linewidth grows by a factor {st.linewidth[-1] / st.linewidth[0]:.0f}")
export.write_svg(out / "mandel.svg", np.log10(bq),
                 {"xi/<n>": st.mandel_ratio,
                  "closure xi/<n>^2": inv.closure_mandel_factor(bq, 1.0)},
                 xlabel="log10 beta q0", ylabel="ratio", reference=None)

# %% The closed moments agree with the moment hierarchy integrated to t -> oo
c = inv.coeffs_from_generation(q0=50.0, beta=1e-3, C=1.0, x=2.0, a0=3.0)
m = inv.steady_moments(c)
o = moment_ode_oracle(c)
print(f"<n> closed {m.mean_n:.10f} vs oracle {o.mean_n:.10f}")
print(f"S = {m.S:.5f}, mu = {complex(m.mu):.5f}")

# %% Driven spectra in the two quadratures
w = np.linspace(-4, 4, 161) * abs(c.k.real)
Y0 = inv.spectrum_Y(c, m, w, 0.0)
Y90 = inv.spectrum_Y(c, m, w, np.pi / 2)
print(f"Y(0) = {Y0[80]:.4f} (Theta = 0), {Y90[80]:.4f} (Theta = pi/2)")
print(f"half width at half maximum {inv.half_max_width(c, m):.5f}, "
      f"-Re k = {-c.k.real:.5f}")
export.write_svg(out / "invfree_spectra.svg", w, {"Theta = 0": Y0, "Theta = pi/2": Y90},
                 xlabel="omega", ylabel="Y", title="inversion-free medium, driven")
