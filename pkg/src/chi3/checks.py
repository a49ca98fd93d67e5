"""Numerical acceptance checks shared by the test-suite and ``chi3 check``.

Each check returns a :class:`CheckResult`; none of them raises on failure.
"""
from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import invfree, linearized as lin
from .params import MediumParams, Susceptibilities, susceptibilities, transparent
from .params import validate_regime
from .sde import LinearSDE, SimConfig, moment_ode_oracle, ou_spectrum_oracle
from .sde import simulate, welch_estimate
from .semiclassical import effective_dispersion, oscillation_frequency, steady_state

MC_SEED = 0xC0FFEE


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    runtime: float = 0.0
    budget: float = math.inf

    @property
    def ok(self) -> bool:
        return self.passed and self.runtime < self.budget

    def line(self) -> str:
        flag = "PASS" if self.ok else "FAIL"
        over = "" if self.runtime < self.budget else f" (over {self.budget:g}s budget)"
        return f"[{flag}] {self.name}: {self.detail} [{self.runtime:.2f}s]{over}"


def _timed(name: str, budget: float):
    def deco(fn):
        def run(*args, **kwargs) -> CheckResult:
            t0 = time.perf_counter()
            try:
                passed, detail = fn(*args, **kwargs)
            except Exception as exc:  # a crash is a failed check, not an abort
                passed, detail = False, f"{type(exc).__name__}: {exc}"
            return CheckResult(name, bool(passed), detail, time.perf_counter() - t0,
                               budget)
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return deco


def normwise_error(a, b) -> float:
    """``max|a - b| / max|b|``; robust where a spectrum crosses zero."""
    a, b = np.asarray(a), np.asarray(b)
    den = float(np.abs(b).max())
    return float(np.abs(a - b).max()) / den if den > 0 else float(np.abs(a).max())


def random_medium(rng: np.random.Generator, *, x_min: float = 12.0,
                  x_max: float = 60.0, bu_max: float = 0.03, fc: float | None = None,
                  ) -> tuple[MediumParams, Susceptibilities, float]:
    """Parameter set inside the weak-field, far-detuned oscillator regime.

    Returns the parameters, their transparent susceptibilities and the target
    ``beta U`` used to pick the drive.
    """
    gamma = rng.uniform(0.5, 2.0)
    x = rng.uniform(x_min, x_max)
    A = rng.uniform(0.5, 2.0)
    t = rng.uniform(0.2, 4.0)
    g = 0.1
    Delta = x * gamma
    N = t * A * (gamma ** 2 + Delta ** 2) / (g * g * Delta)
    base = MediumParams(gamma=gamma, Gamma1=2 * gamma, Gamma2=2 * gamma, Delta=Delta,
                        g=g, N=N, C_in=A, C_out=A, a0=1.0,
                        fc=rng.uniform(0.2, 1.0) if fc is None else fc)
    s = transparent(susceptibilities(base))
    bu = rng.uniform(1e-3, bu_max)
    U = bu / s.beta
    kappa, chi = effective_dispersion(base, s)
    a0 = math.sqrt(U * (A * A + (kappa - chi * U) ** 2))
    return base.replace(a0=a0), s, bu


# 1 ---------------------------------------------------------------------------
@_timed("1 spectra vs OU oracle", 60.0)
def check_spectrum_oracle(n_sets: int = 100, n_grid: int = 256, seed: int = 1,
                          tol: float = 1e-8):
    rng = np.random.default_rng(seed)
    worst = {}
    for model in lin.MODELS:
        err = 0.0
        done = 0
        while done < n_sets:
            p, s, _ = random_medium(rng)
            op = lin.operating_point(model, p, s)
            if model != "eha" and validate_regime(p, op.U, s=s).hard_failures():
                continue
            if not op.dd.is_stable:
                continue
            theta = op.phi0 + rng.uniform(0, math.pi)
            w = np.linspace(-6 * p.A, 6 * p.A, n_grid)
            g = lin.spectrum_g_raw(op.dd, op.U, op.phi0, p.C_out, w, theta)
            o = ou_spectrum_oracle(LinearSDE.from_drift_diffusion(op.dd), w,
                                   lin.quadrature_weights(op.U, op.phi0, theta),
                                   p.C_out)
            err = max(err, normwise_error(g, o))
            done += 1
        worst[model] = err
    ok = all(e < tol for e in worst.values())
    return ok, "max rel err " + ", ".join(f"{m}={e:.2e}" for m, e in worst.items())


# 2 ---------------------------------------------------------------------------
def random_invfree(rng: np.random.Generator) -> invfree.InvFreeCoeffs:
    while True:
        k = complex(-rng.uniform(0.2, 3.0), rng.uniform(-2, 2))
        c = invfree.InvFreeCoeffs(
            k=k, Lam_aa=complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * abs(k.real),
            Lam_aas=rng.uniform(-1, 0.9) * abs(k.real), b=rng.uniform(-1, 2),
            a0=rng.uniform(0, 3))
        if not c.stability_violations():
            return c


def _moment_vector(m: invfree.SteadyMoments) -> np.ndarray:
    return np.array([m.mean_alpha, m.mean_alpha2, m.mean_n])


@_timed("2 moments vs moment-ODE oracle", 60.0)
def check_moment_oracle(n_sets: int = 100, seed: int = 2, tol: float = 1e-8):
    rng = np.random.default_rng(seed)
    err = 0.0
    for _ in range(n_sets):
        c = random_invfree(rng)
        a = _moment_vector(invfree.steady_moments(c))
        b = _moment_vector(moment_ode_oracle(c))
        err = max(err, normwise_error(a, b))
    return err < tol, f"max rel err {err:.2e} over {n_sets} sets"


# 3 ---------------------------------------------------------------------------
@_timed("3 EHA maximum squeezing drop", 1.0)
def check_eha_drop():
    _, g10 = lin.eha_band_minimum(10.0)
    _, g30 = lin.eha_band_minimum(30.0)
    ok10 = abs(abs(g10) - 200 / 301) < 1e-12
    ok30 = abs(abs(g30) - 2 / 3) < 1e-3
    # the closed minimum must be the minimum of the fixed-phase spectrum, and
    # that spectrum must be the full expression at tan(theta) = 1/(sqrt3 t)
    t, eps = 1.7, 0.6
    p = MediumParams(C_in=eps * 1.3, C_out=1.3)
    k = 1e-3
    U = t * p.A / (math.sqrt(3) * k)
    dd = lin.drift_diffusion("eha", p, transparent(susceptibilities(p)), U, k=k)
    wb = np.linspace(0, 4, 4001)
    raw = lin.spectrum_g_raw(dd, U, 0.0, p.C_out, wb * p.A, lin.eha_fixed_phase(t))
    band = lin.eha_fixed_phase_spectrum(t, wb, C_norm=1 + eps)
    we, gmin = lin.eha_band_minimum(t, C_norm=1 + eps)
    ok_form = normwise_error(raw, band) < 1e-10
    ok_min = abs(wb[np.argmin(band)] - we) < 2e-3 and abs(band.min() - gmin) < 1e-6
    return (ok10 and ok30 and ok_form and ok_min,
            f"|g_min|(t=10)={abs(g10):.6f} (200/301={200 / 301:.6f}), "
            f"|g_min|(t=30)={abs(g30):.6f}, band form ok={ok_form}, argmin ok={ok_min}")


# 4 ---------------------------------------------------------------------------
@_timed("4 HM zero-frequency squeezing", 1.0)
def check_hm_zero_frequency():
    lo, hi = lin.zero_frequency_optimal("hm", beta_U=0.1, t=1.0, fc=1.0)
    exact = lo == -0.2 and hi == 0.2
    # full optimal-phase machinery at omega_bar = 0, single-ended cavity
    coeffs = lin.Table2Coeffs(W0=0.2, V0=0.0, Wpi2=-0.2, Vpi2=0.0, t=1.0, model="hm")
    Gm, _ = lin.optimal_G("hm", coeffs, np.array([0.0]), beta_U=0.1, fc=1.0)
    g0 = 2 * Gm[0] / lin._dbar(1.0, 0.0)
    agree = abs(g0 - lo) < 1e-15
    ts = np.linspace(-5, 5, 1000)
    mags = np.array([lin.zero_frequency_optimal("hm", beta_U=0.1, t=t)[1] for t in ts])
    t_best = abs(ts[np.argmax(mags)])
    near = abs(t_best - 1) <= (ts[1] - ts[0])
    return (exact and agree and near,
            f"minus branch={lo!r}, optimal-phase value={g0:.15f}, argmax|t|={t_best:.4f}")


# 5 ---------------------------------------------------------------------------
@_timed("5 HM(kappa1=0, fc=1) == EHA(k=chi1)", 1.0)
def check_reduction_identity(p: MediumParams | None = None):
    p = MediumParams() if p is None else p
    s = transparent(susceptibilities(p))
    q = p.replace(fc=1.0, omega_offset=(p.f1s - p.f2s) * s.kappa1)
    U = steady_state(q, s).U
    hm = lin.drift_diffusion("hm", q, s, U)
    eha = lin.drift_diffusion("eha", q, s, U, k=(q.f1s - q.f2s) * s.chi1)
    s0 = Susceptibilities(linear=complex(0.0, 0.0), cubic=s.cubic, beta=s.beta)
    q0 = q.replace(omega_offset=0.0)
    hm0 = lin.drift_diffusion("hm", q0, s0, U)
    eha0 = lin.drift_diffusion("eha", q0, s0, U, k=s0.chi1)
    same = hm.entries() == eha.entries() and hm0.entries() == eha0.entries()
    return same, f"HM {hm.entries()} vs EHA {eha.entries()}"


# 6 ---------------------------------------------------------------------------
@_timed("6 SLM phase noise >= HM", 5.0)
def check_slm_excess(n_sets: int = 50, seed: int = 6, n_grid: int = 256):
    rng = np.random.default_rng(seed)
    worst = math.inf
    for _ in range(n_sets):
        p, s, _ = random_medium(rng, fc=1.0)
        st = steady_state(p, s)
        w = np.linspace(-6 * p.A, 6 * p.A, n_grid)
        th = st.phi0 + math.pi / 2
        g = {m: lin.spectrum_g_raw(lin.drift_diffusion(m, p, s, st.U), st.U, st.phi0,
                                   p.C_out, w, th) for m in ("hm", "slm")}
        worst = min(worst, float((g["slm"] - g["hm"]).min()))
    return worst >= 0, f"min (g_SLM - g_HM) = {worst:.3e} over {n_sets} sets"


# 7 ---------------------------------------------------------------------------
def mc_spectrum(p: MediumParams | None = None, *, model: str = "hm", n_traj: int = 2000,
                seed: int = MC_SEED, dt: float = 0.005, record_every: int = 10,
                T_seg: float = 64.0, n_seg: int = 16, theta: float = 0.0,
                omega_bar=None):
    """Welch estimate of the linearized spectrum against its closed form.

    Returns ``(omega_bar, estimate, stderr, closed_form, ensemble)``.
    """
    p = MediumParams() if p is None else p
    op = lin.operating_point(model, p)
    sde = LinearSDE.from_drift_diffusion(op.dd)
    dts = dt * record_every
    nper = int(round(T_seg / dts))
    cfg = SimConfig(n_traj=n_traj, dt=dt, t_max=(n_seg + 1) * (nper // 2) * dts,
                    seed=seed, record_every=record_every)
    ens = simulate(sde, cfg)
    wb = np.linspace(0, 5, 64) if omega_bar is None else np.asarray(omega_bar)
    w = lin.quadrature_weights(op.U, op.phi0, op.phi0 + theta)
    est, se = welch_estimate(ens, w, wb * p.A, nperseg=nper, min_segments=n_seg,
                             linewidth=p.A, scale=p.C_out)
    g = lin.spectrum_g_raw(op.dd, op.U, op.phi0, p.C_out, wb * p.A, op.phi0 + theta)
    return wb, est, se, g, ens


@_timed("7 Monte Carlo spectrum (HM defaults)", 300.0)
def check_monte_carlo(n_traj: int = 2000, seed: int = MC_SEED):
    _, est, se, g, _ = mc_spectrum(n_traj=n_traj, seed=seed)
    i = int(np.argmax(np.abs(g)))
    peak = abs(est[i] - g[i]) / abs(g[i])
    frac = float(np.mean(np.abs(est - g) <= 3 * se))
    return (peak < 0.05 and frac >= 0.95,
            f"peak rel dev {peak:.3%}, {frac:.1%} of points within 3 s.e.")


# 8 ---------------------------------------------------------------------------
@_timed("8 inversion-free photon statistics", 5.0)
def check_photon_statistics(n: int = 100):
    q0 = np.logspace(-3, 4, n)[:, None]
    beta = np.logspace(-7, 1, n)[None, :]
    st = invfree.generation_stats(q0, beta, 1.0)
    ceiling = float((beta * st.mean_n - 0.5).max())
    ratio = st.mandel_xi / st.mean_n
    in_band = bool(np.all(ratio >= 0.4) and np.all(ratio < 1))
    hi = invfree.generation_stats(1.0, 1e3, 1.0)
    lim = abs(hi.mandel_ratio - 0.4)
    n_form = bool(np.allclose(st.mean_n, q0 / (1 + 2 * beta * q0), rtol=1e-15, atol=0))
    return (ceiling <= 1e-12 and in_band and lim < 1e-3 and n_form,
            f"max(beta<n> - 1/2)={ceiling:.2e}, xi/<n> in [{ratio.min():.4f}, "
            f"{ratio.max():.6f}], |ratio-0.4| at beta q0=1e3: {lim:.2e}")


# 9 ---------------------------------------------------------------------------
@_timed("9 linewidth from half maximum of Y", 5.0)
def check_linewidth(n_sets: int = 20, seed: int = 9):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_sets):
        beta = 10 ** rng.uniform(-4, -0.5)
        q0 = 10 ** rng.uniform(-1, 3)
        C = rng.uniform(0.2, 5)
        c = invfree.coeffs_from_generation(q0, beta, C, x=0.0, a0=0.0)
        m = invfree.steady_moments(c)
        width = invfree.half_max_width(c, m, 0.0)
        dnu = invfree.generation_stats(q0, beta, C).linewidth
        worst = max(worst, abs(width - dnu) / dnu)
    return worst < 1e-3, f"max rel dev {worst:.2e} over {n_sets} triples"


# 10 --------------------------------------------------------------------------
@_timed("10 reproducible simulate output", 300.0)
def check_reproducible(n_traj: int = 50):
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for run in ("a", "b"):
            d = Path(tmp) / run
            code = main(["simulate", "--model", "hm", "--ntraj", str(n_traj),
                         "--seed", "7", "--grid", "0:4:33", "--out", str(d),
                         "--format", "csv"])
            if code != 0:
                return False, f"simulate exited with {code}"
            outs.append({f.name: f.read_bytes() for f in sorted(d.glob("*.csv"))})
        same = outs[0] == outs[1] and len(outs[0]) > 0
        return same, f"{len(outs[0])} CSV file(s) byte-identical={same}"


# invariants used by ``chi3 check`` --------------------------------------------
@_timed("omega^2 identity (HM)", 5.0)
def check_omega2_identity(p: MediumParams | None = None):
    p = MediumParams() if p is None else p
    s = transparent(susceptibilities(p))
    q = p.replace(omega_offset=0.0, f1s=1.0, f2s=0.0)
    worst = 0.0
    for U in np.linspace(0.05, 0.3, 11) / s.beta:
        dd = lin.drift_diffusion("hm", q, s, U)
        bu = s.beta * U
        ref = s.kappa1 ** 2 * (1 - bu) * (1 - 3 * bu)
        worst = max(worst, abs(oscillation_frequency(dd) - ref) / abs(ref))
    return worst < 1e-12, f"max rel dev {worst:.2e}"


@_timed("scaled spectra == raw spectra", 5.0)
def check_scaled_consistency(p: MediumParams | None = None):
    p = MediumParams() if p is None else p
    s = transparent(susceptibilities(p))
    wb = np.linspace(-5, 5, 201)
    worst = {}
    for model in lin.MODELS:
        op = lin.operating_point(model, p, s, weak_field=True)
        e = 0.0
        for which, th in (("amplitude", 0.0), ("phase", math.pi / 2)):
            sc = lin.spectrum_scaled(op.coeffs, p.eps, wb, which)
            raw = lin.spectrum_g_raw(op.dd, op.U, 0.0, p.C_out, wb * p.A, th)
            e = max(e, normwise_error(sc, raw))
        worst[model] = e
    return (all(v < 1e-10 for v in worst.values()),
            ", ".join(f"{m}={e:.1e}" for m, e in worst.items()))


@_timed("optimal-phase envelopes == phase scan", 5.0)
def check_optimal_envelopes(p: MediumParams | None = None):
    p = MediumParams() if p is None else p
    s = transparent(susceptibilities(p))
    wb = np.linspace(-5, 5, 41)
    worst = 0.0
    for model in lin.MODELS:
        op = lin.operating_point(model, p, s, weak_field=True)
        gm, gp = lin.spectrum_optimal(model, p, s, op.U, p.eps, wb, k=op.k)
        scale = max(np.abs(gm).max(), np.abs(gp).max())
        for i, x in enumerate(wb):
            o = lin.optimal_phase(model, p, s, op.U, x * p.A, k=op.k, weak_field=True)
            worst = max(worst, abs(o.g_min - gm[i]) / scale, abs(o.g_max - gp[i]) / scale)
    return worst < 1e-10, f"max rel dev {worst:.1e}"


ACCEPTANCE = (check_spectrum_oracle, check_moment_oracle, check_eha_drop,
              check_hm_zero_frequency, check_reduction_identity, check_slm_excess,
              check_monte_carlo, check_photon_statistics, check_linewidth,
              check_reproducible)
SLOW = (check_monte_carlo, check_reproducible)


def property_suite(p: MediumParams | None = None, *, full: bool = False
                   ) -> list[CheckResult]:
    """Checks run by ``chi3 check``; ``full`` adds the stochastic ones."""
    out = [check_scaled_consistency(p), check_omega2_identity(p),
           check_optimal_envelopes(p), check_reduction_identity(p)]
    for fn in ACCEPTANCE:
        if fn is check_reduction_identity or (fn in SLOW and not full):
            continue
        out.append(fn())
    return out
