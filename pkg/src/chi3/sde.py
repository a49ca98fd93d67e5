"""Linear stochastic differential equations: simulation and exact oracles.

Two-dimensional Ito SDEs of the form

    dx = (M x + c) dt + F(x) dW,   F F^T = D + diag(x) K diag(x),

cover both the linearized intensity/phase fluctuations (``K = 0``) and the
inversion-free field in doubled phase space ``(alpha, alpha+)``.  P-function
diffusion matrices need not be positive semidefinite; they are factorized over
the complex numbers and the coordinates then become complex, with ensemble
averages of analytic functions still correct.

Oracles:

* :func:`ou_spectrum_oracle`: stationary spectrum from the resolvent.
* :func:`moment_ode_oracle`: closed moment hierarchy integrated to
  stationarity with a matrix-exponential propagator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DomainError, StabilityError

_TINY = 1e-300


@dataclass(frozen=True)
class LinearSDE:
    drift: np.ndarray
    diffusion: np.ndarray
    drive: np.ndarray = field(default_factory=lambda: np.zeros(2))
    labels: tuple = ("eps", "psi")
    multiplicative: np.ndarray | None = None   # K in D + diag(x) K diag(x)

    def __post_init__(self):
        M = np.asarray(self.drift)
        D = np.asarray(self.diffusion)
        if M.shape != (2, 2) or D.shape != (2, 2):
            raise ValueError("drift and diffusion must be 2x2")
        if not np.allclose(D, D.T, rtol=0, atol=1e-14 * max(1.0, np.abs(D).max())):
            raise ValueError("diffusion must be symmetric")

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(np.asarray(self.drift, dtype=complex))

    @property
    def is_stable(self) -> bool:
        return bool(np.all(self.eigenvalues.real < 0))

    def fixed_point(self) -> np.ndarray:
        return -np.linalg.solve(np.asarray(self.drift, dtype=complex),
                                np.asarray(self.drive, dtype=complex))

    @classmethod
    def from_drift_diffusion(cls, dd) -> "LinearSDE":
        return cls(drift=dd.drift, diffusion=dd.diffusion, labels=("eps", "psi"))


def _real_psd(D: np.ndarray, tol: float) -> bool:
    if np.iscomplexobj(D) and np.abs(D.imag).max() > tol:
        return False
    return bool(np.linalg.eigvalsh(D.real).min() >= -tol)


def _takagi(D: np.ndarray) -> np.ndarray:
    """``U sqrt(Sigma)`` from the Takagi factorization ``D = U Sigma U^T``.

    For ``D = A + iB`` the pairs ``(x, y)`` with ``u = x + iy`` are the
    eigenvectors of the real symmetric ``[[A, B], [B, -A]]`` belonging to its
    non-negative eigenvalues ``sigma``.
    """
    A, Bi = D.real, D.imag
    H = np.block([[A, Bi], [Bi, -A]])
    vals, vecs = np.linalg.eigh(H)
    top = vecs[:, 2:]
    U = top[:2] + 1j * top[2:]
    return U * np.sqrt(np.clip(vals[2:], 0.0, None))


def noise_factorization(D) -> np.ndarray:
    """Factor ``B`` with ``B @ B.T == D`` (plain transpose, no conjugation).

    Real and lower triangular (after a diagonal pivot) when ``D`` is real and
    positive semidefinite; otherwise the complex Takagi factor, whose entries
    never exceed ``sqrt(max|D|)``.
    """
    D = np.asarray(D)
    if np.abs(D).max() == 0:
        return np.zeros((2, 2))
    scale = float(np.abs(D).max())
    tol = 1e-14 * scale
    if not _real_psd(D, tol):
        return _takagi(D.astype(complex))
    Dw = D.real.astype(float)
    piv = 0 if Dw[0, 0] >= Dw[1, 1] else 1
    o = 1 - piv
    B = np.zeros((2, 2))
    if Dw[piv, piv] <= tol:
        return B
    l00 = math.sqrt(Dw[piv, piv])
    l10 = Dw[o, piv] / l00
    B[piv, 0] = l00
    B[o, 0] = l10
    B[o, 1] = math.sqrt(max(Dw[o, o] - l10 * l10, 0.0))
    return B


def _balance(M: np.ndarray) -> np.ndarray:
    """Diagonal scales making the off-diagonal drift entries equal in size."""
    a, b = abs(M[0, 1]), abs(M[1, 0])
    if a > 0 and b > 0:
        return np.array([math.sqrt(a / b), 1.0])
    return np.ones(2)


def balanced_factorization(D, M) -> np.ndarray:
    """``S nf(S^-1 D S^-1)`` with ``S`` from :func:`_balance`; still ``B B^T = D``.

    For complex noise this keeps the spurious imaginary excursions of
    coordinates with very different natural scales comparable.
    """
    s = _balance(np.asarray(M))
    Dn = np.asarray(D) / np.outer(s, s)
    return s[:, None] * noise_factorization(Dn)


@dataclass(frozen=True)
class SimConfig:
    n_traj: int = 200
    dt: float = 0.01
    t_max: float = 200.0          # recorded span after burn-in
    seed: int = 0
    record_every: int = 1
    burn_in: float | None = None  # default 10 / min |Re lambda|
    stationary: bool = True       # False allows unstable drift (transient)
    x0: tuple | None = None       # default: deterministic fixed point
    block: int = 1024             # time steps per noise block
    chunk: int = 500              # trajectories integrated together

    def __post_init__(self):
        if self.n_traj < 1 or self.dt <= 0 or self.t_max <= 0 or self.record_every < 1:
            raise ValueError("need n_traj >= 1, dt > 0, t_max > 0, record_every >= 1")


@dataclass
class TrajectoryEnsemble:
    samples: np.ndarray          # (n_traj, n_samples, 2)
    dt: float                    # integration step
    dt_sample: float             # spacing of stored samples
    t_max: float
    rng_seed: int
    n_traj: int
    scheme: str = "euler-maruyama"
    noise_mode: str = "real"     # "complex" when D is not PSD
    mean: np.ndarray | None = None   # analytic stationary mean
    labels: tuple = ("eps", "psi")

    def moments(self) -> dict:
        """Time-and-ensemble averages of x, x x^T with standard errors
        computed across trajectories."""
        x = self.samples
        per = {
            "m1": x.mean(axis=1),
            "m2": np.einsum("tsi,tsj->tij", x, x) / x.shape[1],
        }
        out = {}
        for key, v in per.items():
            out[key] = v.mean(axis=0)
            out[key + "_se"] = (v.real.std(axis=0, ddof=1)
                                + 1j * v.imag.std(axis=0, ddof=1)) / math.sqrt(len(v))
        return out


def _rng(seed: int, n: int) -> list[np.random.Generator]:
    ss = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(c)) for c in ss.spawn(n)]


def simulate(sde: LinearSDE, cfg: SimConfig) -> TrajectoryEnsemble:
    """Euler-Maruyama integration of an ensemble of independent trajectories.

    Trajectory ``j`` draws its noise from its own Philox substream, so results
    do not depend on ``chunk`` or ``block``.
    """
    M = np.asarray(sde.drift, dtype=complex)
    lam = sde.eigenvalues
    stable = bool(np.all(lam.real < 0))
    if cfg.stationary and not stable:
        raise StabilityError(f"fluctuations not stationary: eigenvalues {lam}")
    lam_max = float(np.abs(lam).max())
    if cfg.dt * lam_max >= 0.1:
        raise DomainError(f"dt * max|lambda| = {cfg.dt * lam_max:.3g} >= 0.1")
    if cfg.burn_in is None:
        lam_min = float(np.abs(lam.real).min()) if stable else 0.0
        burn = 10.0 / lam_min if lam_min > 0 else 0.0
    else:
        burn = cfg.burn_in

    D = np.asarray(sde.diffusion)
    K = sde.multiplicative
    complex_noise = not _real_psd(D, 1e-14 * max(np.abs(D).max(), _TINY))
    H = balanced_factorization(D, M)
    G = None
    if K is not None:
        G = noise_factorization(K)
        complex_noise = complex_noise or np.iscomplexobj(G) and np.abs(G.imag).max() > 0
    c = np.asarray(sde.drive, dtype=complex)
    real_run = (not complex_noise and not np.iscomplexobj(sde.drift)
                and not np.any(c.imag) and (K is None or not np.iscomplexobj(K)))
    dtype = float if real_run else complex
    mean = sde.fixed_point() if stable else None
    if cfg.x0 is not None:
        x_init = np.asarray(cfg.x0, dtype=complex)
    else:
        x_init = mean if mean is not None else np.zeros(2, dtype=complex)

    n_burn = int(math.ceil(burn / cfg.dt))
    n_rec = int(math.ceil(cfg.t_max / (cfg.dt * cfg.record_every)))
    n_steps = n_burn + n_rec * cfg.record_every
    n_noise = 2 + (2 if K is not None else 0)
    sq = math.sqrt(cfg.dt)
    Md = (np.eye(2) + cfg.dt * M).T
    cd = cfg.dt * c
    if real_run:
        Md, cd, H = Md.real, cd.real, H.real
        G = None if G is None else G.real
    HT = (H * sq).T
    GT = None if G is None else (G * sq).T

    gens = _rng(cfg.seed, cfg.n_traj)
    out = np.empty((cfg.n_traj, n_rec, 2), dtype=dtype)
    for lo in range(0, cfg.n_traj, cfg.chunk):
        hi = min(lo + cfg.chunk, cfg.n_traj)
        x = np.broadcast_to(x_init.real if real_run else x_init,
                            (hi - lo, 2)).astype(dtype)
        step, rec = 0, 0
        while step < n_steps:
            nb = min(cfg.block, n_steps - step)
            dW = np.stack([g.standard_normal((nb, n_noise)) for g in gens[lo:hi]])
            add = dW[..., :2] @ HT
            mul = None if GT is None else dW[..., 2:] @ GT
            for j in range(nb):
                x_new = x @ Md + cd + add[:, j]
                if mul is not None:
                    x_new += x * mul[:, j]
                x = x_new
                step += 1
                if step > n_burn and (step - n_burn) % cfg.record_every == 0:
                    out[lo:hi, rec] = x
                    rec += 1
    return TrajectoryEnsemble(samples=out, dt=cfg.dt,
                              dt_sample=cfg.dt * cfg.record_every,
                              t_max=n_rec * cfg.dt * cfg.record_every,
                              rng_seed=cfg.seed, n_traj=cfg.n_traj,
                              noise_mode="complex" if complex_noise else "real",
                              mean=mean, labels=sde.labels)


def welch_estimate(ens: TrajectoryEnsemble, quad_weights, omega_grid, *,
                   nperseg: int | None = None, min_segments: int = 16,
                   linewidth: float | None = None, scale: float = 1.0):
    """Hann-windowed, 50 %-overlap segment-averaged spectrum of
    ``X = w . (x - <x>)`` at the angular frequencies ``omega_grid``.

    The periodogram uses ``Xhat(omega) Xhat(-omega)`` (equal to ``|Xhat|^2``
    for real signals), which stays unbiased for complex doubled-phase-space
    trajectories.  Standard errors come from the spread of per-trajectory
    averages.  Returns ``(estimate, stderr)``.
    """
    from scipy.signal.windows import hann

    w = np.asarray(quad_weights)
    omega = np.asarray(omega_grid, dtype=float)
    x = ens.samples
    ref = ens.mean if ens.mean is not None else x.mean(axis=(0, 1))
    X = (x - ref) @ w
    n = X.shape[1]
    if nperseg is None:
        nperseg = 2 * n // (min_segments + 1)
    if nperseg < 2:
        raise DomainError(f"record of {n} samples too short for {min_segments} segments")
    hop = nperseg // 2
    nseg = (n - nperseg) // hop + 1 if n >= nperseg else 0
    if nseg < min_segments:
        raise DomainError(f"only {nseg} Welch segments (< {min_segments})")
    T_seg = nperseg * ens.dt_sample
    if linewidth is not None and T_seg < 8.0 / linewidth:
        raise DomainError("spectral resolution insufficient: segment length "
                          f"{T_seg:.3g} < 8 / linewidth")
    win = hann(nperseg, sym=False)
    norm = ens.dt_sample / np.sum(win ** 2)
    tt = np.arange(nperseg) * ens.dt_sample
    Ep = np.exp(1j * np.outer(tt, omega)) * win[:, None]
    Em = np.exp(-1j * np.outer(tt, omega)) * win[:, None]
    idx = np.arange(nseg)[:, None] * hop + np.arange(nperseg)
    per_traj = np.empty((X.shape[0], omega.size))
    for lo in range(0, X.shape[0], 64):
        segs = X[lo:lo + 64][:, idx]                       # (t, seg, nper)
        Fp = segs @ Ep
        if np.iscomplexobj(segs):
            Fm = segs @ Em
        else:
            Fm = np.conj(Fp)
        per_traj[lo:lo + 64] = (Fp * Fm).real.mean(axis=1) * norm
    per_traj *= scale
    est = per_traj.mean(axis=0)
    se = per_traj.std(axis=0, ddof=1) / math.sqrt(per_traj.shape[0]) \
        if per_traj.shape[0] > 1 else np.full_like(est, np.nan)
    return est, se


def _effective_diffusion(sde: LinearSDE, second_moments: np.ndarray | None) -> np.ndarray:
    D = np.asarray(sde.diffusion, dtype=complex)
    if sde.multiplicative is None:
        return D
    if second_moments is None:
        second_moments = moment_ode_oracle(sde, max_order=2).second
    return D + np.asarray(sde.multiplicative) * second_moments


def ou_spectrum_oracle(sde: LinearSDE, omega_grid, quad_weights, scale: float = 1.0,
                       *, second_moments=None):
    """Stationary spectrum ``w (-i w - M)^-1 D (i w - M^T)^-1 w^T``.

    State-dependent diffusion is replaced by its stationary average, which
    is exact for the second-order statistics of linear-drift systems.
    """
    if not sde.is_stable:
        raise StabilityError("fluctuations not stationary")
    M = np.asarray(sde.drift, dtype=complex)
    D = _effective_diffusion(sde, second_moments)
    w = np.asarray(quad_weights, dtype=complex)
    omega = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    eye = np.eye(2)
    out = np.empty(omega.size)
    for i, om in enumerate(omega):
        u = np.linalg.solve((-1j * om * eye - M).T, w)      # w (-iw - M)^-1
        v = np.linalg.solve(1j * om * eye - M.T, w)         # (iw - M^T)^-1 w^T
        out[i] = (u @ D @ v).real
    return scale * out


def lyapunov_covariance(sde: LinearSDE) -> np.ndarray:
    """Stationary covariance ``C`` solving ``M C + C M^T + D = 0``."""
    from scipy.linalg import solve_continuous_lyapunov

    D = _effective_diffusion(sde, None)
    return solve_continuous_lyapunov(np.asarray(sde.drift, dtype=complex), -D)


@dataclass(frozen=True)
class MomentSolution:
    values: dict          # (p, q) -> <x0^p x1^q>
    t_final: float
    residual: float

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.values[(1, 0)], self.values[(0, 1)]])

    @property
    def second(self) -> np.ndarray:
        v = self.values
        return np.array([[v[(2, 0)], v[(1, 1)]], [v[(1, 1)], v[(0, 2)]]])


def _monomials(order: int) -> list[tuple[int, int]]:
    return [(p, n - p) for n in range(order + 1) for p in range(n, -1, -1)]


def moment_generator(sde: LinearSDE, max_order: int = 2) -> tuple[np.ndarray, list]:
    """Matrix ``L`` with ``d/dt m = L m`` on the monomials ``x0^p x1^q``,
    ``p + q <= max_order`` (first entry is the constant monomial)."""
    M = np.asarray(sde.drift, dtype=complex)
    c = np.asarray(sde.drive, dtype=complex)
    D = np.asarray(sde.diffusion, dtype=complex)
    K = (np.zeros((2, 2), dtype=complex) if sde.multiplicative is None
         else np.asarray(sde.multiplicative, dtype=complex))
    mons = _monomials(max_order)
    index = {m: i for i, m in enumerate(mons)}
    L = np.zeros((len(mons), len(mons)), dtype=complex)

    def add(row, p, q, coef):
        if coef != 0 and p >= 0 and q >= 0:
            L[row, index[(p, q)]] += coef

    for row, (p, q) in enumerate(mons):
        # drift
        add(row, p, q, p * M[0, 0] + q * M[1, 1])
        add(row, p - 1, q + 1, p * M[0, 1])
        add(row, p + 1, q - 1, q * M[1, 0])
        add(row, p - 1, q, p * c[0])
        add(row, p, q - 1, q * c[1])
        # diffusion: 1/2 sum B_ij d_i d_j with B = D + diag(x) K diag(x)
        add(row, p - 2, q, 0.5 * p * (p - 1) * D[0, 0])
        add(row, p, q - 2, 0.5 * q * (q - 1) * D[1, 1])
        add(row, p - 1, q - 1, p * q * D[0, 1])
        add(row, p, q, 0.5 * p * (p - 1) * K[0, 0] + 0.5 * q * (q - 1) * K[1, 1]
            + p * q * K[0, 1])
    return L, mons


def moment_ode_oracle(system, max_order: int = 2, *, Theta: float = 0.0,
                      rtol: float = 1e-13, max_doublings: int = 200,
                      t_start: float | None = None):
    """Stationary moments by propagating the closed moment equations from the
    origin until the state stops changing.

    The propagator ``P(t) = expm(L t)`` is squared repeatedly, so the horizon
    doubles each round.  ``system`` is a :class:`LinearSDE` or anything with a
    ``langevin()`` method (for example :class:`~chi3.invfree.InvFreeCoeffs`,
    whose result is returned as a :class:`~chi3.invfree.SteadyMoments`
    referenced to the local-oscillator phase ``Theta``).
    """
    as_invfree = hasattr(system, "langevin")
    sde = system.langevin() if as_invfree else system
    L, mons = moment_generator(sde, max_order)
    lam = np.linalg.eigvals(L[1:, 1:]) if len(mons) > 1 else np.array([-1.0])
    if np.any(lam.real >= 0):
        raise StabilityError("moment equations have no stationary solution "
                             f"(max Re lambda = {lam.real.max():.3g})")
    h = t_start if t_start is not None else 0.5 / float(np.abs(lam).max())
    P = expm(L * h)
    m0 = np.zeros(len(mons), dtype=complex)
    m0[0] = 1.0
    m = P @ m0
    t = h
    for _ in range(max_doublings):
        P = P @ P
        t *= 2
        m_new = P @ m0
        delta = np.abs(m_new - m).max()
        m = m_new
        if delta <= rtol * max(np.abs(m[1:]).max() if len(m) > 1 else 0.0, 1e-300):
            break
    residual = float(np.abs(L[1:] @ m).max())
    if delta > rtol * max(np.abs(m[1:]).max(), 1e-300) and delta > 1e-300:
        raise StabilityError(f"moment ODE did not converge by t = {t:.3g}; "
                             f"residual {residual:.3g}")
    sol = MomentSolution(values={mn: complex(v) for mn, v in zip(mons, m)},
                         t_final=t, residual=residual)
    if as_invfree:
        from .invfree import SteadyMoments

        v = sol.values
        return SteadyMoments(mean_alpha=v[(1, 0)], mean_alpha2=v[(2, 0)],
                             mean_n=float(v[(1, 1)].real), theta=Theta)
    return sol
