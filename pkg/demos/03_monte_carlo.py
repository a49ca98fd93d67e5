"""Direct simulation of the linearized Haken fluctuations and a Welch
spectrum estimate checked against the closed form.

Runs 300 trajectories by default (about ten seconds); pass a larger count as
the second argument for tighter error bars.
"""
# %%
import sys
from pathlib import Path

import numpy as np

from chi3 import export
from chi3.checks import mc_spectrum

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
n_traj = int(sys.argv[2]) if len(sys.argv) > 2 else 300

# %% Amplitude quadrature (Theta = phi0)
wb, est, se, closed, ens = mc_spectrum(n_traj=n_traj, seed=2024,
                                       omega_bar=np.linspace(0, 5, 33))
print(f"noise mode: {ens.noise_mode}, {ens.samples.shape[1]} samples per trajectory")
z = (est - closed) / se
print(f"{np.mean(np.abs(z) < 3):.0%} of points within 3 standard errors")
i = int(np.argmax(np.abs(closed)))
print(f"at the peak: estimate {est[i]:.4e} +- {se[i]:.1e}, closed form {closed[i]:.4e}")

export.write_svg(out / "monte_carlo.svg", wb,
                 {"closed form": closed, "estimate": est, "estimate - 2 se": est - 2 * se,
                  "estimate + 2 se": est + 2 * se},
                 ylabel="g", title=f"Haken model, {n_traj} trajectories")

# %% Stationary second moments.  Euler-Maruyama carries an O(dt) bias, so
# the estimate is compared with both the continuous-time covariance and the
# exact covariance of the discrete update x -> (1 + dt M) x + noise.
from scipy.linalg import solve_discrete_lyapunov  # noqa: E402

from chi3 import linearized as lin  # noqa: E402
from chi3.params import MediumParams  # noqa: E402
from chi3.sde import LinearSDE, lyapunov_covariance  # noqa: E402

op = lin.operating_point("hm", MediumParams())
cont = lyapunov_covariance(LinearSDE.from_drift_diffusion(op.dd)).real
disc = solve_discrete_lyapunov(np.eye(2) + ens.dt * op.dd.drift, ens.dt * op.dd.diffusion)
mom = ens.moments()
for (i, j), name in zip(((0, 0), (0, 1), (1, 1)), ("eps eps", "eps psi", "psi psi")):
    print(f"<{name}>: {mom['m2'][i, j].real:+.4e} +- {mom['m2_se'][i, j].real:.1e} "
          f"(continuous {cont[i, j]:+.4e}, Euler map {disc[i, j]:+.4e})")
